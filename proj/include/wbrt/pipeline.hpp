#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wbrt/aperture.hpp"
#include "wbrt/drr.hpp"
#include "wbrt/landmarks.hpp"
#include "wbrt/metrics.hpp"
#include "wbrt/phantom.hpp"
#include "wbrt/projection.hpp"

namespace wbrt {

struct Approach2Source {
    enum class Kind { file, threshold, perturbed };
    Kind kind = Kind::threshold;
    std::string path;  // file
    std::uint64_t seed = 0;
    double magnitude = 0;
    PerturbKind perturb = PerturbKind::dilate;
    std::vector<std::string> labels;  // empty = all
};

// file:PATH | threshold | perturbed:SEED:MM:KIND[:label,label...]
Approach2Source parse_approach2(const std::string& s);
std::string to_string(const Approach2Source& s);

struct PipelineConfig {
    ApertureConfig aperture;
    BeamGeometry beam;
    double bev_spacing = 1.0;
    double bev_border = 50.0;
    Approach2Source approach2;
    double threshold = 14.0;
    PathWindow skin_window{0.0};
    PathWindow vertebra_window{2.8};
    std::string output_dir;
};

// Strict: unknown keys are format errors. Missing keys keep defaults.
PipelineConfig pipeline_config_from_json(const json& j);
json to_json(const PipelineConfig& c);

struct Timing {
    std::string stage;
    double ms;
};

struct CaseResult {
    BevFrame frame;
    SilhouetteSet s1, s2;
    LandmarkSet l1, l2;
    AperturePolygon a1, a2;
    QaReport qa;
    std::optional<DrrImage> drr;
    std::vector<Timing> timings;
    std::vector<std::string> warnings;
};

// One pipeline pass in memory. oracle may be null. Errors carry the stage name.
CaseResult run_case(const Cohort& cohort, const PhantomOracle* oracle, const PipelineConfig& cfg, bool want_drr);

struct Rgb {
    std::uint8_t r, g, b;
};
inline constexpr Rgb kSilhouetteColor{0, 128, 255};
inline constexpr Rgb kApproach1Color{255, 0, 0};
inline constexpr Rgb kApproach2Color{0, 255, 0};

// P6 bytes: DRR gray base, silhouette outlines, approach 1 then approach 2 boundaries.
std::string render_overlay(const DrrImage& drr, const AperturePolygon& a1, const AperturePolygon& a2,
                           const SilhouetteSet& silhouettes);

// Returns the exit code: 0 QA pass, 2 QA fail. Throws on error after removing partial outputs.
int pipeline_run(const std::filesystem::path& cohort_dir, const PipelineConfig& cfg, const std::filesystem::path& out_dir);

// "A..B" or "a,b,c"; an empty list is a usage error.
std::vector<std::uint64_t> parse_seeds(const std::string& s);

struct BatchOptions {
    int threads = 4;
    bool quiet = true;
};

// Returns the exit code: 0 when every case ran (regardless of verdicts), 1 if any case errored.
int batch_run(const PipelineConfig& cfg, const std::vector<std::uint64_t>& seeds, const std::filesystem::path& out_dir,
              const BatchOptions& opt = {});

}  // namespace wbrt
