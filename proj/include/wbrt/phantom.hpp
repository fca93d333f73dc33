#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wbrt/geometry.hpp"
#include "wbrt/util.hpp"
#include "wbrt/volume.hpp"

namespace wbrt {

struct BoxSolid {
    Vec3 center;
    Vec3 extent;  // full edge lengths along x, y, z
};

// Head is centered at the patient origin. The left eye sits at +x, the right eye mirrors it.
struct PhantomSpec {
    std::uint64_t seed = 0;
    Vec3 head{75, 97, 105};
    double shell = 6;
    Vec3 brain_center{0, 8, 27};
    Vec3 brain{52, 75, 54};
    double eye_r = 12;
    Vec3 eye_center{25, -58, -25};
    double lens_r = 4;
    double lens_offset = 7;  // toward anterior (-y) from the eye center
    BoxSolid c1{{0, 20, -39.5}, {60, 30, 15}};
    BoxSolid c2{{0, 20, -61}, {60, 30, 18}};
    double hu_air = -1000;
    double hu_skin = 700;
    double hu_brain = 35;
    double hu_eye = 30;
    double hu_lens = 60;
    double hu_vertebra = 1200;

    Vec3 eye(int side) const { return {side * eye_center.x, eye_center.y, eye_center.z}; }  // side +1 left, -1 right
    Vec3 lens(int side) const { return {side * eye_center.x, eye_center.y - lens_offset, eye_center.z}; }
};

// Violated containment relations; empty when the spec is valid.
std::vector<std::string> validate(const PhantomSpec& spec);

// Relations the analytic beam's-eye view must satisfy for the default aperture
// configuration to be constructible; used by randomize as an extra rejection filter.
std::vector<std::string> landmark_feasibility(const PhantomSpec& spec);

PhantomSpec randomize(std::uint64_t seed, const PhantomSpec& base);

struct Grid {
    Dims dims{256, 256, 256};
    PatientFrame frame{{-128, -128, -128}, {1, 1, 1}};
};

// At least min_dim voxels per axis, grown so the head keeps a border of air.
Grid fit_grid(const PhantomSpec& spec, double spacing = 1.0, int min_dim = 256, double border = 20.0);

struct OracleShape {
    std::string kind;  // ellipse | disk | rect
    Vec2 center;
    Vec2 half;  // semi-axes, radius twice, or half extents
    Extrema ext;
};

struct PhantomOracle {
    std::map<std::string, OracleShape> shapes;  // keyed by structure label
};

struct Phantom {
    PhantomSpec spec;
    Cohort cohort;
    PhantomOracle oracle;
};

Phantom generate(const PhantomSpec& spec, const Grid& grid);

PhantomOracle make_oracle(const PhantomSpec& spec);
BevSilhouette rasterize_oracle(const OracleShape& shape, const BevFrame& frame, const std::string& label);

json to_json(const PhantomSpec& spec);
PhantomSpec spec_from_json(const json& j);
json to_json(const PhantomOracle& oracle);
PhantomOracle oracle_from_json(const json& j);

}  // namespace wbrt
