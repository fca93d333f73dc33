#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wbrt/geometry.hpp"
#include "wbrt/projection.hpp"
#include "wbrt/util.hpp"

namespace wbrt {

enum class AbShape { horizontal, diagonal };
enum class BcPosition { lens, moderate, eye };
enum class CdDe { contour, straight };
enum class CaudalVertebra { C1, C2 };

struct ApertureConfig {
    AbShape ab_shape = AbShape::diagonal;
    double ab_drop = 15;
    BcPosition bc_position = BcPosition::moderate;
    CdDe cd_de = CdDe::contour;
    double brain_margin = 15;
    double skin_flash = 15;
    CaudalVertebra caudal_vertebra = CaudalVertebra::C2;
    bool include_orbitals = false;
    double vertebra_anterior_margin = 3;
    double orbit_superior_margin = 3;
};

void check_config(const ApertureConfig& cfg);
json to_json(const ApertureConfig& cfg);
// Strict: unknown keys and out-of-set values are format errors. Missing keys keep defaults.
ApertureConfig aperture_config_from_json(const json& j);

std::string vertebra_label(const ApertureConfig& cfg);
std::vector<std::string> required_labels(const ApertureConfig& cfg);

struct LandmarkSet {
    Vec2 A, B, C, E, F, G, H, I;
    std::optional<Vec2> D;
    Polyline2D ce_path;
    double u_ant_border = 0;
    double u_post_border = 0;
    double v_sup_border = 0;
    double v_caudal = 0;
    double u_bc = 0;
    bool include_orbitals = false;
    ApertureConfig config;
    std::vector<std::string> warnings;
};

LandmarkSet compute_landmarks(const SilhouetteSet& s, const ApertureConfig& cfg);

// Violated ordering invariants; empty when valid.
std::vector<std::string> validate(const LandmarkSet& l);

json to_json(const LandmarkSet& l);

}  // namespace wbrt
