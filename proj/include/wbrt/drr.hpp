#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "wbrt/geometry.hpp"
#include "wbrt/util.hpp"
#include "wbrt/volume.hpp"

namespace wbrt {

enum class ProjectionMode { parallel, divergent };

const char* mode_name(ProjectionMode m);
ProjectionMode parse_mode(const std::string& s);

struct BeamGeometry {
    double gantry_deg = 270.0;
    ProjectionMode mode = ProjectionMode::parallel;
    double sad = 1000.0;  // divergent mode only
    Vec3 isocenter;
};

// Throws when the beam is unusable for the volume (gantry != 270, SAD too short).
void check_beam(const BeamGeometry& beam, const CtVolume& volume);

struct DrrOptions {
    double mu_water = 0.02;  // 1/mm
    double step = 0.0;       // mm; 0 selects min(spacing)/2
    int threads = 0;         // 0 selects hardware concurrency
};

struct DrrImage {
    BevFrame frame;
    std::vector<std::uint16_t> display;
    std::vector<double> path;
};

DrrImage render(const CtVolume& volume, const BeamGeometry& beam, const BevFrame& frame, const DrrOptions& opt = {});

std::uint16_t display_value(double path);

// Centroid of the set voxels (mm); throws on an empty mask.
Vec3 mask_centroid(const StructureMask& m);

struct PathWindow {
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
};

// Pixels with lo <= path <= hi and path > 0, reduced to the label's expected components:
// two for vertebrae (C1 = the superior one, C2 = the inferior one, "vertebra" = both),
// one otherwise.
BevSilhouette threshold_segment(const DrrImage& image, const std::string& label, PathWindow window);

json drr_meta(const DrrImage& image, const BeamGeometry& beam, const DrrOptions& opt);
std::string encode_drr_pgm(const DrrImage& image);

}  // namespace wbrt
