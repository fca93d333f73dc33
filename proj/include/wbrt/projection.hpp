#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "wbrt/drr.hpp"
#include "wbrt/geometry.hpp"
#include "wbrt/phantom.hpp"
#include "wbrt/volume.hpp"

namespace wbrt {

enum class Provenance { approach1, approach2_file, approach2_threshold, approach2_perturbed };

const char* provenance_name(Provenance p);

// BEV labels: the eight structure labels plus the per-view unions "eye" and "lens".
struct SilhouetteSet {
    BevFrame frame;
    std::map<std::string, BevSilhouette> items;
    Provenance provenance = Provenance::approach1;
    std::vector<std::string> warnings;

    const BevSilhouette* find(const std::string& label) const;
    // Present and non-empty.
    bool has(const std::string& label) const;
    void put(BevSilhouette s);
};

// Adds "eye"/"lens" unions from the side labels when they are missing.
void add_unions(SilhouetteSet& s);

BevSilhouette project(const StructureMask& mask, const BeamGeometry& beam, const BevFrame& frame);

SilhouetteSet project_all(const Cohort& cohort, const BeamGeometry& beam, const BevFrame& frame);

// Skin bounding box plus border, pixel centers on the voxel lattice when spacing matches.
BevFrame default_frame(const StructureMask& skin, double spacing = 1.0, double border = 50.0);

SilhouetteSet oracle_silhouettes(const PhantomOracle& oracle, const BevFrame& frame);

json to_json(const BevFrame& f);
BevFrame bev_frame_from_json(const json& j);

// BEV mask exchange: one 8-bit PGM (0/255) per label plus bev_meta.json.
void export_bev(const SilhouetteSet& s, const std::filesystem::path& dir);
BevFrame read_bev_frame(const std::filesystem::path& dir);
SilhouetteSet ingest_bev_masks(const std::filesystem::path& dir, const BevFrame& frame,
                               const std::vector<std::string>& required = {});

enum class PerturbKind { dilate, erode, boundary_jitter };

const char* perturb_kind_name(PerturbKind k);
PerturbKind parse_perturb_kind(const std::string& s);

// labels empty = every non-empty silhouette in the set.
SilhouetteSet perturb(const SilhouetteSet& s, std::uint64_t seed, double magnitude_mm, PerturbKind kind,
                      const std::vector<std::string>& labels = {});

}  // namespace wbrt
