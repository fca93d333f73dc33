#include "wbrt/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "wbrt/errors.hpp"
#include "wbrt/pnm.hpp"
#include "wbrt/util.hpp"

namespace wbrt {

namespace {

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.push_back("");
    return out;
}

double parse_number(const std::string& s, const std::string& what)
{
    std::size_t used = 0;
    double x = 0;
    try {
        x = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(x)) fail(ErrorKind::argument, what + ": not a number: \"" + s + "\"");
    return x;
}

std::uint64_t parse_u64(const std::string& s, const std::string& what)
{
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
        fail(ErrorKind::argument, what + ": not a non-negative integer: \"" + s + "\"");
    try {
        return std::stoull(s);
    } catch (const std::exception&) {
        fail(ErrorKind::argument, what + ": out of range: \"" + s + "\"");
    }
}

std::string fmt_g(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

}  // namespace

Approach2Source parse_approach2(const std::string& s)
{
    Approach2Source a;
    if (s == "threshold") {
        a.kind = Approach2Source::Kind::threshold;
        return a;
    }
    if (s.rfind("file:", 0) == 0) {
        a.kind = Approach2Source::Kind::file;
        a.path = s.substr(5);
        if (a.path.empty()) fail(ErrorKind::argument, "approach2 file source needs a path");
        return a;
    }
    if (s.rfind("perturbed:", 0) == 0) {
        const auto parts = split(s.substr(10), ':');
        if (parts.size() != 3 && parts.size() != 4)
            fail(ErrorKind::argument, "approach2 perturbed source is perturbed:SEED:MM:KIND[:labels]");
        a.kind = Approach2Source::Kind::perturbed;
        a.seed = parse_u64(parts[0], "perturbation seed");
        a.magnitude = parse_number(parts[1], "perturbation magnitude");
        if (a.magnitude < 0) fail(ErrorKind::argument, "perturbation magnitude must be >= 0");
        a.perturb = parse_perturb_kind(parts[2]);
        if (parts.size() == 4) {
            for (const auto& l : split(parts[3], ',')) {
                if (!is_structure_label(l) && l != "eye" && l != "lens")
                    fail(ErrorKind::argument, "unknown structure label \"" + l + "\" in perturbation filter");
                a.labels.push_back(l);
            }
        }
        return a;
    }
    fail(ErrorKind::argument, "approach2 source must be file:PATH, threshold or perturbed:SEED:MM:KIND");
}

std::string to_string(const Approach2Source& a)
{
    switch (a.kind) {
    case Approach2Source::Kind::threshold: return "threshold";
    case Approach2Source::Kind::file: return "file:" + a.path;
    case Approach2Source::Kind::perturbed: {
        std::string s = "perturbed:" + std::to_string(a.seed) + ":" + fmt_g(a.magnitude) + ":" + perturb_kind_name(a.perturb);
        for (std::size_t i = 0; i < a.labels.size(); ++i) s += (i ? "," : ":") + a.labels[i];
        return s;
    }
    }
    return "";
}

namespace {

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys)
{
    if (!j.is_object()) fail(ErrorKind::format, where + " must be a JSON object");
    for (const auto& [k, v] : j.items())
        if (std::none_of(keys.begin(), keys.end(), [&](const char* x) { return k == x; }))
            fail(ErrorKind::format, where + ": unknown key \"" + k + "\"");
}

double number(const json& j, const std::string& where)
{
    if (!j.is_number()) fail(ErrorKind::format, where + " must be a number");
    return j.get<double>();
}

PathWindow window_from(const json& j, const std::string& where)
{
    if (!j.is_array() || j.size() != 2) fail(ErrorKind::format, where + " must be [lo, hi] (hi may be null)");
    PathWindow w;
    w.lo = number(j[0], where + "[0]");
    w.hi = j[1].is_null() ? std::numeric_limits<double>::infinity() : number(j[1], where + "[1]");
    if (!(w.lo <= w.hi)) fail(ErrorKind::format, where + ": lo > hi");
    return w;
}

json window_json(const PathWindow& w)
{
    return json::array({r9(w.lo), std::isfinite(w.hi) ? json(r9(w.hi)) : json(nullptr)});
}

}  // namespace

PipelineConfig pipeline_config_from_json(const json& j)
{
    PipelineConfig c;
    only_keys(j, "config", {"$schema", "aperture", "beam", "bev", "approach2", "qa", "threshold_windows", "output_dir"});
    if (j.contains("aperture")) c.aperture = aperture_config_from_json(j["aperture"]);
    if (j.contains("beam")) {
        const json& b = j["beam"];
        only_keys(b, "beam", {"mode", "sad"});
        if (b.contains("mode")) {
            if (!b["mode"].is_string()) fail(ErrorKind::format, "beam.mode must be a string");
            try {
                c.beam.mode = parse_mode(b["mode"].get<std::string>());
            } catch (const Error& e) {
                fail(ErrorKind::format, std::string("beam.mode: ") + e.what());
            }
        }
        if (b.contains("sad")) c.beam.sad = number(b["sad"], "beam.sad");
        if (!(c.beam.sad > 0)) fail(ErrorKind::format, "beam.sad must be > 0");
    }
    if (j.contains("bev")) {
        const json& b = j["bev"];
        only_keys(b, "bev", {"spacing", "border"});
        if (b.contains("spacing")) c.bev_spacing = number(b["spacing"], "bev.spacing");
        if (b.contains("border")) c.bev_border = number(b["border"], "bev.border");
        if (!(c.bev_spacing > 0)) fail(ErrorKind::format, "bev.spacing must be > 0");
        if (!(c.bev_border >= 30)) fail(ErrorKind::format, "bev.border must be >= 30");
    }
    if (j.contains("approach2")) {
        if (!j["approach2"].is_string()) fail(ErrorKind::format, "approach2 must be a string");
        try {
            c.approach2 = parse_approach2(j["approach2"].get<std::string>());
        } catch (const Error& e) {
            fail(ErrorKind::format, std::string("approach2: ") + e.what());
        }
    }
    if (j.contains("qa")) {
        only_keys(j["qa"], "qa", {"threshold"});
        if (j["qa"].contains("threshold")) c.threshold = number(j["qa"]["threshold"], "qa.threshold");
        if (!(c.threshold >= 0)) fail(ErrorKind::format, "qa.threshold must be >= 0");
    }
    if (j.contains("threshold_windows")) {
        const json& w = j["threshold_windows"];
        only_keys(w, "threshold_windows", {"skin", "vertebra"});
        if (w.contains("skin")) c.skin_window = window_from(w["skin"], "threshold_windows.skin");
        if (w.contains("vertebra")) c.vertebra_window = window_from(w["vertebra"], "threshold_windows.vertebra");
    }
    if (j.contains("output_dir")) {
        if (!j["output_dir"].is_string()) fail(ErrorKind::format, "output_dir must be a string");
        c.output_dir = j["output_dir"].get<std::string>();
    }
    return c;
}

json to_json(const PipelineConfig& c)
{
    json j = {{"aperture", to_json(c.aperture)},
              {"beam", {{"mode", mode_name(c.beam.mode)}, {"sad", r9(c.beam.sad)}}},
              {"bev", {{"spacing", r9(c.bev_spacing)}, {"border", r9(c.bev_border)}}},
              {"approach2", to_string(c.approach2)},
              {"qa", {{"threshold", r9(c.threshold)}}},
              {"threshold_windows", {{"skin", window_json(c.skin_window)}, {"vertebra", window_json(c.vertebra_window)}}}};
    if (!c.output_dir.empty()) j["output_dir"] = c.output_dir;
    return j;
}

namespace {

using Clock = std::chrono::steady_clock;

// Runs fn, records its wall time, and prefixes any error with the stage name.
template <class Fn>
auto stage(const char* name, std::vector<Timing>& timings, Fn&& fn)
{
    const auto t0 = Clock::now();
    auto record = [&] {
        timings.push_back({name, std::chrono::duration<double, std::milli>(Clock::now() - t0).count()});
    };
    try {
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            record();
        } else {
            auto r = fn();
            record();
            return r;
        }
    } catch (const Error& e) {
        fail(e.kind(), std::string(name) + ": " + e.what());
    } catch (const std::bad_alloc&) {
        fail(ErrorKind::internal, std::string(name) + ": out of memory");
    }
}

void require(const SilhouetteSet& s, const std::vector<std::string>& labels, const std::string& what)
{
    for (const auto& l : labels)
        if (!s.has(l)) fail(ErrorKind::missing_structure, what + ": required structure \"" + l + "\" is missing or empty");
}

}  // namespace

CaseResult run_case(const Cohort& cohort, const PhantomOracle* oracle, const PipelineConfig& cfg, bool want_drr)
{
    CaseResult res;
    auto& t = res.timings;
    const auto required = required_labels(cfg.aperture);
    BeamGeometry beam = cfg.beam;

    res.frame = stage("frame", t, [&] {
        const auto* skin = cohort.find("skin");
        if (!skin) fail(ErrorKind::missing_structure, "required structure \"skin\" is missing");
        if (beam.mode == ProjectionMode::divergent) {
            const auto* brain = cohort.find("brain");
            if (!brain) fail(ErrorKind::missing_structure, "required structure \"brain\" is missing");
            beam.isocenter = mask_centroid(*brain);
        }
        return default_frame(*skin, cfg.bev_spacing, cfg.bev_border);
    });

    res.s1 = stage("project", t, [&] {
        for (const auto& l : required) {
            const bool side = l == "eye" || l == "lens";
            const bool present = side ? (cohort.find(l + "_left") || cohort.find(l + "_right")) : cohort.find(l) != nullptr;
            if (!present) fail(ErrorKind::missing_structure, "required structure \"" + l + "\" is missing from the cohort");
        }
        auto s = project_all(cohort, beam, res.frame);
        require(s, required, "approach 1");
        return s;
    });

    const auto kind = cfg.approach2.kind;
    if (want_drr || kind == Approach2Source::Kind::threshold)
        res.drr = stage("drr", t, [&] { return render(cohort.ct, beam, res.frame); });

    stage("approach1", t, [&] {
        res.l1 = compute_landmarks(res.s1, cfg.aperture);
        res.a1 = build(res.l1, res.frame);
    });

    res.s2 = stage("approach2-source", t, [&] {
        SilhouetteSet s;
        switch (kind) {
        case Approach2Source::Kind::file:
            s = ingest_bev_masks(cfg.approach2.path, res.frame, required);
            break;
        case Approach2Source::Kind::threshold: {
            s.frame = res.frame;
            s.provenance = Provenance::approach2_threshold;
            s.put(threshold_segment(*res.drr, "skin", cfg.skin_window));
            s.put(threshold_segment(*res.drr, "vertebra_c1", cfg.vertebra_window));
            s.put(threshold_segment(*res.drr, "vertebra_c2", cfg.vertebra_window));
            if (!oracle)
                fail(ErrorKind::missing_structure,
                     "threshold source separates only skin and vertebrae; brain, eye and lens need oracle.json");
            const auto o = oracle_silhouettes(*oracle, res.frame);
            for (const auto& [label, sil] : o.items)
                if (!s.find(label)) s.put(sil);
            s.warnings.push_back("threshold source: brain, eye and lens silhouettes taken from oracle.json");
            break;
        }
        case Approach2Source::Kind::perturbed: {
            SilhouetteSet base;
            if (oracle) {
                base = oracle_silhouettes(*oracle, res.frame);
            } else {
                base = res.s1;
                base.warnings.push_back("no oracle.json; perturbing the approach 1 silhouettes");
            }
            s = perturb(base, cfg.approach2.seed, cfg.approach2.magnitude, cfg.approach2.perturb, cfg.approach2.labels);
            break;
        }
        }
        require(s, required, "approach 2");
        return s;
    });

    stage("approach2", t, [&] {
        res.l2 = compute_landmarks(res.s2, cfg.aperture);
        res.a2 = build(res.l2, res.frame);
    });

    res.qa = stage("qa", t, [&] {
        QaReport q = qa_compare(res.a1, res.a2, cfg.threshold);
        q.provenance_1 = provenance_name(res.s1.provenance);
        q.provenance_2 = provenance_name(res.s2.provenance);
        q.proxies_1 = proxies(res.a1, res.s1);
        q.proxies_2 = proxies(res.a2, res.s1);
        return q;
    });

    for (const auto* w : {&res.s1.warnings, &res.s2.warnings}) res.warnings.insert(res.warnings.end(), w->begin(), w->end());
    for (const auto& w : res.l1.warnings) res.warnings.push_back("approach 1: " + w);
    for (const auto& w : res.l2.warnings) res.warnings.push_back("approach 2: " + w);
    res.qa.warnings = res.warnings;
    return res;
}

std::string render_overlay(const DrrImage& drr, const AperturePolygon& a1, const AperturePolygon& a2,
                           const SilhouetteSet& silhouettes)
{
    const BevFrame& f = drr.frame;
    for (const auto* fr : {&a1.frame, &a2.frame, &silhouettes.frame})
        if (!same_frame(*fr, f, 1e-6)) fail(ErrorKind::argument, "overlay inputs are not in the DRR frame");
    std::vector<std::uint8_t> rgb(f.size() * 3);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto g = static_cast<std::uint8_t>(drr.display[i] >> 8);
        rgb[3 * i] = rgb[3 * i + 1] = rgb[3 * i + 2] = g;
    }
    auto paint = [&](int c, int r, Rgb col) {
        if (c < 0 || r < 0 || c >= f.cols || r >= f.rows) return;
        const std::size_t i = f.index(c, r) * 3;
        rgb[i] = col.r;
        rgb[i + 1] = col.g;
        rgb[i + 2] = col.b;
    };
    for (const auto& [label, s] : silhouettes.items) {
        if (label == "eye" || label == "lens") continue;
        for (int r = 0; r < f.rows; ++r)
            for (int c = 0; c < f.cols; ++c) {
                if (!s.at(c, r)) continue;
                const bool edge = c == 0 || r == 0 || c == f.cols - 1 || r == f.rows - 1 || !s.at(c - 1, r) ||
                                  !s.at(c + 1, r) || !s.at(c, r - 1) || !s.at(c, r + 1);
                if (edge) paint(c, r, kSilhouetteColor);
            }
    }
    auto outline = [&](const AperturePolygon& a, Rgb col) {
        const auto& p = a.boundary.pts;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const Vec2 s = p[i], e = p[(i + 1) % p.size()];
            const int n = std::max(1, static_cast<int>(std::ceil(norm(e - s) / (0.25 * f.spacing))));
            for (int k = 0; k <= n; ++k) {
                const Vec2 q = s + (static_cast<double>(k) / n) * (e - s);
                paint(static_cast<int>(std::lround((q.u - f.u0) / f.spacing)),
                      static_cast<int>(std::lround((q.v - f.v0) / f.spacing)), col);
            }
        }
    };
    outline(a1, kApproach1Color);
    outline(a2, kApproach2Color);
    return encode_ppm(f.cols, f.rows, rgb);
}

namespace {

json color_json(Rgb c) { return json::array({c.r, c.g, c.b}); }

json timings_json(const std::vector<Timing>& t)
{
    json j = json::object();
    for (const auto& x : t) j[x.stage] = std::round(x.ms * 1000.0) / 1000.0;
    return j;
}

// Output files staged in memory, then written; on failure the ones already written are removed.
class OutputSet {
public:
    explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}
    void add(const std::string& name, std::string bytes) { files_.emplace_back(name, std::move(bytes)); }
    const std::string& bytes(const std::string& name) const
    {
        for (const auto& f : files_)
            if (f.first == name) return f.second;
        fail(ErrorKind::internal, "no staged output " + name);
    }
    const std::vector<std::pair<std::string, std::string>>& files() const { return files_; }
    void commit()
    {
        std::vector<std::filesystem::path> done;
        try {
            std::filesystem::create_directories(dir_);
            for (const auto& [name, bytes] : files_) {
                write_file_atomic(dir_ / name, bytes);
                done.push_back(dir_ / name);
            }
        } catch (...) {
            std::error_code ec;
            for (const auto& p : done) std::filesystem::remove(p, ec);
            throw;
        }
    }

private:
    std::filesystem::path dir_;
    std::vector<std::pair<std::string, std::string>> files_;
};

void stage_case_reports(OutputSet& out, CaseResult& res)
{
    out.add("landmarks_1.json", dump(to_json(res.l1)));
    out.add("landmarks_2.json", dump(to_json(res.l2)));
    out.add("aperture_1.json", dump(to_json(res.a1)));
    out.add("aperture_2.json", dump(to_json(res.a2)));
    res.qa.inputs = {{"aperture_1.json", sha256_hex(out.bytes("aperture_1.json"))},
                     {"aperture_2.json", sha256_hex(out.bytes("aperture_2.json"))}};
    out.add("qa_report.json", dump(to_json(res.qa)));
}

}  // namespace

int pipeline_run(const std::filesystem::path& cohort_dir, const PipelineConfig& cfg, const std::filesystem::path& out_dir)
{
    std::vector<Timing> timings;
    const auto t_all = Clock::now();
    const Cohort cohort = stage("ingest", timings, [&] { return read_cohort(cohort_dir); });
    std::optional<PhantomOracle> oracle;
    if (std::filesystem::exists(cohort_dir / "oracle.json"))
        oracle = stage("ingest-oracle", timings, [&] { return oracle_from_json(read_json(cohort_dir / "oracle.json")); });

    CaseResult res = run_case(cohort, oracle ? &*oracle : nullptr, cfg, true);
    timings.insert(timings.end(), res.timings.begin(), res.timings.end());

    OutputSet out(out_dir);
    stage("write", timings, [&] {
        stage_case_reports(out, res);
        out.add("drr.pgm", encode_drr_pgm(*res.drr));
        out.add("drr_meta.json", dump(drr_meta(*res.drr, cfg.beam, DrrOptions{})));
        out.add("overlay.ppm", render_overlay(*res.drr, res.a1, res.a2, res.s1));
    });

    json inputs = json::object();
    for (const auto& entry : std::filesystem::directory_iterator(cohort_dir)) {
        if (!entry.is_regular_file()) continue;
        const auto name = entry.path().filename().string();
        if (name == "meta.json" || name == "oracle.json" || name == "spec.json" || entry.path().extension() == ".raw")
            inputs[name] = "sha256:" + sha256_hex(read_file(entry.path()));
    }
    if (cfg.approach2.kind == Approach2Source::Kind::file) {
        const std::filesystem::path d = cfg.approach2.path;
        for (const auto& entry : std::filesystem::directory_iterator(d))
            if (entry.is_regular_file())
                inputs["approach2/" + entry.path().filename().string()] = "sha256:" + sha256_hex(read_file(entry.path()));
    }
    json outputs = json::object();
    for (const auto& [name, bytes] : out.files()) outputs[name] = "sha256:" + sha256_hex(bytes);
    timings.push_back({"total", std::chrono::duration<double, std::milli>(Clock::now() - t_all).count()});
    json manifest = {{"tool_version", kToolVersion},
                     {"command", "pipeline run"},
                     {"inputs", inputs},
                     {"config", to_json(cfg)},
                     {"timings_ms", timings_json(timings)},
                     {"warnings", res.warnings},
                     {"outputs", outputs},
                     {"verdict", res.qa.pass ? "pass" : "fail"},
                     {"overlay_colors",
                      {{"approach_1", color_json(kApproach1Color)},
                       {"approach_2", color_json(kApproach2Color)},
                       {"silhouettes", color_json(kSilhouetteColor)},
                       {"base", "DRR display value / 256, gray"}}}};
    out.add("manifest.json", dump(manifest));
    out.commit();
    return res.qa.pass ? 0 : 2;
}

std::vector<std::uint64_t> parse_seeds(const std::string& s)
{
    std::vector<std::uint64_t> seeds;
    const auto dots = s.find("..");
    if (dots != std::string::npos) {
        const std::uint64_t a = parse_u64(s.substr(0, dots), "seed range start");
        const std::uint64_t b = parse_u64(s.substr(dots + 2), "seed range end");
        if (b >= a) {
            if (b - a >= 100000) fail(ErrorKind::usage, "seed range too large");
            for (std::uint64_t x = a; x <= b; ++x) seeds.push_back(x);
        }
    } else if (!s.empty()) {
        for (const auto& part : split(s, ',')) seeds.push_back(parse_u64(part, "seed"));
    }
    if (seeds.empty()) fail(ErrorKind::usage, "seed list is empty");
    return seeds;
}

namespace {

struct CaseSummary {
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    std::string error_kind;
    double hd = 0, msd = 0;
    bool pass = false;
    double coverage_1 = 0;
    bool lens_clear_1 = false;
};

struct Stats {
    double mean = 0, sd = 0;
};

Stats stats(const std::vector<double>& xs)
{
    Stats s;
    if (xs.empty()) return s;
    double sum = 0;
    for (double x : xs) sum += x;
    s.mean = sum / xs.size();
    if (xs.size() > 1) {
        double ss = 0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.sd = std::sqrt(ss / (xs.size() - 1));
    }
    return s;
}

}  // namespace

int batch_run(const PipelineConfig& cfg, const std::vector<std::uint64_t>& seeds, const std::filesystem::path& out_dir,
              const BatchOptions& opt)
{
    if (seeds.empty()) fail(ErrorKind::usage, "seed list is empty");
    std::vector<CaseSummary> cases(seeds.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mu;
    auto worker = [&] {
        for (std::size_t i = next++; i < seeds.size(); i = next++) {
            CaseSummary& cs = cases[i];
            cs.seed = seeds[i];
            const std::string case_dir = "case_" + std::to_string(cs.seed);
            try {
                std::vector<Timing> tt;
                const Phantom ph = stage("phantom", tt, [&] {
                    const PhantomSpec spec = randomize(cs.seed, PhantomSpec{});
                    return generate(spec, fit_grid(spec));
                });
                PipelineConfig c = cfg;
                if (c.approach2.kind == Approach2Source::Kind::perturbed)
                    c.approach2.seed = mix_seed(cfg.approach2.seed, cs.seed);
                CaseResult res = run_case(ph.cohort, &ph.oracle, c, false);
                OutputSet out(out_dir / case_dir);
                stage_case_reports(out, res);
                out.commit();
                cs.ok = true;
                cs.hd = res.qa.distances.hausdorff;
                cs.msd = res.qa.distances.mean_surface;
                cs.pass = res.qa.pass;
                cs.coverage_1 = res.qa.proxies_1->brain_coverage;
                cs.lens_clear_1 = std::all_of(res.qa.proxies_1->lenses.begin(), res.qa.proxies_1->lenses.end(),
                                              [](const LensProxy& l) { return !l.applicable || l.clear; });
            } catch (const Error& e) {
                cs.error = e.what();
                cs.error_kind = kind_name(e.kind());
            } catch (const std::exception& e) {
                cs.error = e.what();
                cs.error_kind = "internal";
            }
            if (!opt.quiet) {
                std::lock_guard<std::mutex> lock(log_mu);
                std::cerr << "case " << cs.seed << ": " << (cs.ok ? (cs.pass ? "pass" : "fail") : "error: " + cs.error) << "\n";
            }
        }
    };
    const int n = std::clamp(opt.threads, 1, 4);
    std::vector<std::thread> pool;
    for (int k = 1; k < n && static_cast<std::size_t>(k) < seeds.size(); ++k) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::vector<double> hds, msds;
    std::size_t ok = 0, passed = 0, covered = 0, clear = 0;
    json list = json::array();
    for (const auto& cs : cases) {
        json e = {{"seed", cs.seed}, {"dir", "case_" + std::to_string(cs.seed)}};
        if (cs.ok) {
            ++ok;
            hds.push_back(cs.hd);
            msds.push_back(cs.msd);
            passed += cs.pass;
            covered += cs.coverage_1 == 1.0;
            clear += cs.lens_clear_1;
            e["verdict"] = cs.pass ? "pass" : "fail";
            e["hausdorff"] = r9(cs.hd);
            e["mean_surface"] = r9(cs.msd);
            e["brain_coverage_1"] = r9(cs.coverage_1);
            e["lens_clear_1"] = cs.lens_clear_1;
        } else {
            e["verdict"] = "error";
            e["error_kind"] = cs.error_kind;
            e["error"] = cs.error;
        }
        list.push_back(e);
    }
    auto rate = [&](std::size_t k) { return ok ? r9(static_cast<double>(k) / ok) : 0.0; };
    const Stats h = stats(hds), m = stats(msds);
    // the output location is not part of the result
    json cfg_echo = to_json(cfg);
    cfg_echo.erase("output_dir");
    json summary = {{"tool_version", kToolVersion},
                    {"config", cfg_echo},
                    {"seeds", seeds},
                    {"cases_total", seeds.size()},
                    {"cases_ok", ok},
                    {"cases_error", seeds.size() - ok},
                    {"hausdorff", {{"mean", r9(h.mean)}, {"sd", r9(h.sd)}}},
                    {"mean_surface", {{"mean", r9(m.mean)}, {"sd", r9(m.sd)}}},
                    {"pass_rates",
                     {{"qa_verdict", rate(passed)}, {"brain_coverage_full", rate(covered)}, {"lens_clear", rate(clear)}}},
                    {"cases", list}};
    write_json(out_dir / "summary.json", summary);
    return ok == seeds.size() ? 0 : 1;
}

}  // namespace wbrt
