#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "wbrt/aperture.hpp"
#include "wbrt/drr.hpp"
#include "wbrt/errors.hpp"
#include "wbrt/landmarks.hpp"
#include "wbrt/metrics.hpp"
#include "wbrt/phantom.hpp"
#include "wbrt/pipeline.hpp"
#include "wbrt/projection.hpp"
#include "wbrt/util.hpp"

namespace fs = std::filesystem;
using namespace wbrt;

namespace {

PipelineConfig load_config(const std::string& path)
{
    if (path.empty()) return {};
    return pipeline_config_from_json(read_json(path));
}

BevFrame frame_for(const Cohort& c, double spacing)
{
    if (const auto* skin = c.find("skin")) return default_frame(*skin, spacing);
    // no skin: cover the whole volume footprint
    StructureMask all;
    all.frame = c.ct.frame;
    all.dims = c.ct.dims;
    all.bits.assign(voxel_count(c.ct.dims), 1);
    return default_frame(all, spacing, 30.0);
}

int cmd_phantom(std::uint64_t seed, bool use_default, const std::string& out)
{
    const PhantomSpec spec = use_default ? PhantomSpec{} : randomize(seed, PhantomSpec{});
    if (use_default) {
        const auto bad = validate(spec);
        if (!bad.empty()) fail(ErrorKind::validation, "default phantom spec invalid: " + bad.front());
    }
    const Phantom ph = generate(spec, fit_grid(spec));
    write_cohort(ph.cohort, out);
    write_json(fs::path(out) / "oracle.json", to_json(ph.oracle));
    write_json(fs::path(out) / "spec.json", to_json(spec));
    return 0;
}

int cmd_drr(const std::string& in, const std::string& mode, const std::string& out, double spacing, double sad, int threads)
{
    const Cohort c = read_cohort(in);
    BeamGeometry beam;
    beam.mode = parse_mode(mode);
    beam.sad = sad;
    if (beam.mode == ProjectionMode::divergent) {
        if (const auto* brain = c.find("brain")) beam.isocenter = mask_centroid(*brain);
    }
    DrrOptions opt;
    opt.threads = threads;
    const DrrImage img = render(c.ct, beam, frame_for(c, spacing), opt);
    const fs::path p(out);
    write_file_atomic(p, encode_drr_pgm(img));
    write_json((p.has_parent_path() ? p.parent_path() : fs::path(".")) / "drr_meta.json", drr_meta(img, beam, opt));
    return 0;
}

int cmd_project(const std::string& in, const std::string& out, const std::string& mode, double spacing, double sad)
{
    const Cohort c = read_cohort(in);
    BeamGeometry beam;
    beam.mode = parse_mode(mode);
    beam.sad = sad;
    if (beam.mode == ProjectionMode::divergent) {
        if (const auto* brain = c.find("brain")) beam.isocenter = mask_centroid(*brain);
    }
    export_bev(project_all(c, beam, frame_for(c, spacing)), out);
    return 0;
}

int cmd_aperture(const std::string& in, const std::string& config, const std::string& out)
{
    const PipelineConfig cfg = load_config(config);
    const BevFrame frame = read_bev_frame(in);
    const SilhouetteSet s = ingest_bev_masks(in, frame, required_labels(cfg.aperture));
    const LandmarkSet l = compute_landmarks(s, cfg.aperture);
    const AperturePolygon a = build(l, frame);
    write_json(fs::path(out) / "landmarks.json", to_json(l));
    write_json(fs::path(out) / "aperture.json", to_json(a));
    write_file_atomic(fs::path(out) / "aperture.svg", to_svg(a));
    for (const auto& w : l.warnings) std::cerr << "warning: " << w << "\n";
    return 0;
}

int cmd_qa(const std::string& a, const std::string& b, const std::string& out, double threshold)
{
    const std::string ba = read_file(a), bb = read_file(b);
    json ja, jb;
    try {
        ja = json::parse(ba);
        jb = json::parse(bb);
    } catch (const json::exception& e) {
        fail(ErrorKind::format, std::string("aperture file is not JSON: ") + e.what());
    }
    QaReport q = qa_compare(aperture_from_json(ja), aperture_from_json(jb), threshold);
    q.provenance_1 = fs::path(a).filename().string();
    q.provenance_2 = fs::path(b).filename().string();
    q.inputs = {{fs::path(a).filename().string(), sha256_hex(ba)}, {fs::path(b).filename().string(), sha256_hex(bb)}};
    if (q.inputs[0].first == q.inputs[1].first) {
        q.inputs[0].first = a;
        q.inputs[1].first = b;
    }
    const std::string text = dump(to_json(q));
    if (out.empty())
        std::cout << text;
    else
        write_file_atomic(out, text);
    return q.pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Whole-brain radiotherapy field aperture pipeline"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    std::string in, out, config, mode = "parallel", approach2, seeds;
    std::optional<double> threshold;
    std::uint64_t seed = 0;
    bool use_default = false;
    double spacing = 1.0, sad = 1000.0;
    int threads = 0;

    auto* phantom = app.add_subcommand("phantom", "Synthetic head phantoms");
    phantom->require_subcommand(1);
    auto* gen = phantom->add_subcommand("generate", "Write a phantom cohort container and its oracle");
    gen->add_option("--seed", seed, "Randomization seed");
    gen->add_flag("--default", use_default, "Write the unjittered default phantom");
    gen->add_option("--out", out, "Output directory")->required();

    auto* drr = app.add_subcommand("drr", "Digitally reconstructed radiographs");
    drr->require_subcommand(1);
    auto* drr_render = drr->add_subcommand("render", "Render the right-lateral DRR");
    drr_render->add_option("--in", in, "Cohort directory")->required();
    drr_render->add_option("--mode", mode, "parallel|divergent");
    drr_render->add_option("--out", out, "Output PGM path")->required();
    drr_render->add_option("--spacing", spacing, "BEV pixel spacing (mm)");
    drr_render->add_option("--sad", sad, "Source-axis distance for divergent mode (mm)");
    drr_render->add_option("--threads", threads, "Worker threads (0 = all cores)");

    auto* project = app.add_subcommand("project", "Project 3D masks into BEV silhouettes");
    project->add_option("--in", in, "Cohort directory")->required();
    project->add_option("--out", out, "Output BEV directory")->required();
    project->add_option("--mode", mode, "parallel|divergent");
    project->add_option("--spacing", spacing, "BEV pixel spacing (mm)");
    project->add_option("--sad", sad, "Source-axis distance for divergent mode (mm)");

    auto* aperture = app.add_subcommand("aperture", "Aperture construction");
    aperture->require_subcommand(1);
    auto* ap_build = aperture->add_subcommand("build", "Landmarks and aperture from BEV masks");
    ap_build->add_option("--in", in, "BEV directory")->required();
    ap_build->add_option("--config", config, "Pipeline config JSON");
    ap_build->add_option("--out", out, "Output directory")->required();

    std::vector<std::string> pair;
    auto* qa = app.add_subcommand("qa", "Aperture comparison");
    qa->require_subcommand(1);
    auto* qa_cmp = qa->add_subcommand("compare", "HD/MSD between two aperture files");
    qa_cmp->add_option("apertures", pair, "Two aperture.json files")->required()->expected(2);
    qa_cmp->add_option("--out", out, "Report path (stdout if omitted)");
    qa_cmp->add_option("--threshold", threshold, "Pass threshold (mm)");

    auto* pipeline = app.add_subcommand("pipeline", "Full dual-approach pipeline");
    pipeline->require_subcommand(1);
    auto* run = pipeline->add_subcommand("run", "Run both approaches and QA on one cohort");
    run->add_option("--in", in, "Cohort directory")->required();
    run->add_option("--config", config, "Pipeline config JSON");
    run->add_option("--out", out, "Output directory");
    run->add_option("--approach2", approach2, "file:PATH | threshold | perturbed:SEED:MM:KIND[:labels]");
    run->add_option("--threshold", threshold, "QA threshold (mm)");

    auto* batch = app.add_subcommand("batch", "Cohort runs over phantom seeds");
    batch->require_subcommand(1);
    auto* brun = batch->add_subcommand("run", "Run the pipeline for every seed");
    brun->add_option("--seeds", seeds, "A..B or a,b,c")->required();
    brun->add_option("--config", config, "Pipeline config JSON");
    brun->add_option("--out", out, "Output directory");
    brun->add_option("--approach2", approach2, "file:PATH | threshold | perturbed:SEED:MM:KIND[:labels]");
    brun->add_option("--threshold", threshold, "QA threshold (mm)");
    brun->add_option("--threads", threads, "Parallel cases (1-4)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    auto pipeline_cfg = [&] {
        PipelineConfig cfg = load_config(config);
        if (!approach2.empty()) cfg.approach2 = parse_approach2(approach2);
        if (threshold) {
            if (!(*threshold >= 0)) fail(ErrorKind::argument, "--threshold must be >= 0");
            cfg.threshold = *threshold;
        }
        if (!out.empty()) cfg.output_dir = out;
        if (cfg.output_dir.empty()) fail(ErrorKind::usage, "no output directory (--out or output_dir in the config)");
        return cfg;
    };

    try {
        if (gen->parsed()) return cmd_phantom(seed, use_default, out);
        if (drr_render->parsed()) return cmd_drr(in, mode, out, spacing, sad, threads);
        if (project->parsed()) return cmd_project(in, out, mode, spacing, sad);
        if (ap_build->parsed()) return cmd_aperture(in, config, out);
        if (qa_cmp->parsed()) return cmd_qa(pair[0], pair[1], out, threshold.value_or(14.0));
        if (run->parsed()) {
            const PipelineConfig cfg = pipeline_cfg();
            return pipeline_run(in, cfg, cfg.output_dir);
        }
        if (brun->parsed()) {
            const auto list = parse_seeds(seeds);
            const PipelineConfig cfg = pipeline_cfg();
            BatchOptions opt;
            opt.threads = threads > 0 ? threads : 4;
            opt.quiet = false;
            return batch_run(cfg, list, cfg.output_dir, opt);
        }
    } catch (const Error& e) {
        std::cerr << "error [" << kind_name(e.kind()) << "]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error [internal]: " << e.what() << "\n";
        return 1;
    }
    std::cerr << app.help();
    return 1;
}
