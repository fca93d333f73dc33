#include <doctest.h>

#include <fstream>

#include "support.hpp"
#include "wbrt/errors.hpp"
#include "wbrt/pipeline.hpp"
#include "wbrt/pnm.hpp"

using namespace wbrt;
namespace fs = std::filesystem;

namespace {

// Default phantom written once through the CLI.
const fs::path& cohort_dir()
{
    static const fs::path dir = [] {
        const fs::path d = test::scratch_dir("cohort_default");
        REQUIRE(test::run_cli("phantom generate --default --out " + d.string()) == 0);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("pipeline config is strict")
{
    const json ok = {{"aperture", {{"brain_margin", 20}}},
                     {"beam", {{"mode", "divergent"}, {"sad", 800}}},
                     {"bev", {{"spacing", 0.5}, {"border", 40}}},
                     {"approach2", "perturbed:4:2:erode"},
                     {"qa", {{"threshold", 10}}},
                     {"threshold_windows", {{"skin", {0.1, nullptr}}, {"vertebra", {3, 50}}}}};
    const PipelineConfig c = pipeline_config_from_json(ok);
    CHECK(c.aperture.brain_margin == 20);
    CHECK(c.beam.mode == ProjectionMode::divergent);
    CHECK(c.beam.sad == 800);
    CHECK(c.bev_spacing == 0.5);
    CHECK(c.threshold == 10);
    CHECK(c.approach2.kind == Approach2Source::Kind::perturbed);
    CHECK(c.approach2.perturb == PerturbKind::erode);
    CHECK(c.skin_window.hi == std::numeric_limits<double>::infinity());
    CHECK(c.vertebra_window.hi == 50);
    CHECK(to_json(pipeline_config_from_json(to_json(c))) == to_json(c));

    for (const json& bad : {json{{"threshhold", 3}}, json{{"qa", {{"threshold", "x"}}}},
                            json{{"aperture", {{"skin_flash", 12}}}}, json{{"threshold_windows", {{"skin", {5, 1}}}}},
                            json{{"beam", {{"mode", "fan"}}}}}) {
        CHECK_THROWS_AS(pipeline_config_from_json(bad), Error);
    }
}

TEST_CASE("approach-2 source and seed parsing")
{
    const auto p = parse_approach2("perturbed:7:2.5:boundary-jitter:brain,skin");
    CHECK(p.seed == 7);
    CHECK(p.magnitude == 2.5);
    CHECK(p.labels == std::vector<std::string>{"brain", "skin"});
    CHECK(parse_approach2(to_string(p)).labels == p.labels);
    CHECK(parse_approach2("file:/x/y").path == "/x/y");
    CHECK(parse_approach2("threshold").kind == Approach2Source::Kind::threshold);
    CHECK_THROWS_AS(parse_approach2("perturbed:1:2"), Error);
    CHECK_THROWS_AS(parse_approach2("perturbed:1:2:dilate:spleen"), Error);
    CHECK_THROWS_AS(parse_approach2("oracle"), Error);

    CHECK(parse_seeds("3..5") == std::vector<std::uint64_t>{3, 4, 5});
    CHECK(parse_seeds("9,2") == std::vector<std::uint64_t>{9, 2});
    CHECK_THROWS_AS(parse_seeds("a..b"), Error);
    CHECK_THROWS_AS(parse_seeds("1,,2"), Error);
    for (const char* bad : {"", "5..3"}) {
        try {
            parse_seeds(bad);
            FAIL("expected a usage error for '" << bad << "'");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::usage);
        }
    }
}

TEST_CASE("run_case with zero perturbation gives identical apertures")
{
    const Phantom& ph = test::default_phantom();
    PipelineConfig cfg;
    cfg.approach2 = parse_approach2("perturbed:1:0:dilate");
    const CaseResult r = run_case(ph.cohort, &ph.oracle, cfg, false);
    CHECK(r.qa.pass);
    CHECK(r.qa.distances.hausdorff == 0.0);
    CHECK(r.qa.provenance_2 == "approach2-perturbed");
    REQUIRE(r.qa.proxies_1);
    CHECK(r.qa.proxies_1->brain_coverage == 1.0);
    CHECK_FALSE(r.drr);
}

TEST_CASE("CLI pipeline run: exit codes and outputs")
{
    const fs::path out = test::scratch_dir("run_pass");
    const std::string base = "pipeline run --in " + cohort_dir().string() + " ";
    REQUIRE(test::run_cli(base + "--approach2 perturbed:1:0:dilate --out " + out.string()) == 0);

    for (const char* f : {"landmarks_1.json", "landmarks_2.json", "aperture_1.json", "aperture_2.json", "qa_report.json",
                          "drr.pgm", "drr_meta.json", "overlay.ppm", "manifest.json"})
        CHECK_MESSAGE(fs::exists(out / f), f);

    const json qa = read_json(out / "qa_report.json");
    CHECK(qa["verdict"] == "pass");
    CHECK(qa["distances"]["hausdorff"] == 0.0);
    CHECK(qa["inputs"]["aperture_1.json"] == "sha256:" + sha256_hex(slurp(out / "aperture_1.json")));

    const json manifest = read_json(out / "manifest.json");
    for (const auto& [name, digest] : manifest["outputs"].items())
        CHECK_MESSAGE(digest == "sha256:" + sha256_hex(slurp(out / name)), name);
    CHECK(manifest["inputs"]["meta.json"] == "sha256:" + sha256_hex(slurp(cohort_dir() / "meta.json")));
    CHECK(manifest["verdict"] == "pass");

    // overlay is a P6 image of the BEV frame, identical across runs
    const json meta = read_json(out / "drr_meta.json");
    const std::string ppm = slurp(out / "overlay.ppm");
    const std::string head = "P6\n" + std::to_string(meta["frame"]["cols"].get<int>()) + " " +
                             std::to_string(meta["frame"]["rows"].get<int>()) + "\n255\n";
    CHECK(ppm.rfind(head, 0) == 0);
    CHECK(ppm.size() == head.size() + 3 * meta["frame"]["cols"].get<std::size_t>() * meta["frame"]["rows"].get<std::size_t>());
    const fs::path again = test::scratch_dir("run_pass_again");
    REQUIRE(test::run_cli(base + "--approach2 perturbed:1:0:dilate --out " + again.string()) == 0);
    CHECK(slurp(again / "overlay.ppm") == ppm);
    CHECK(slurp(again / "qa_report.json") == slurp(out / "qa_report.json"));
    CHECK(slurp(again / "drr.pgm") == slurp(out / "drr.pgm"));

    const fs::path fail_dir = test::scratch_dir("run_fail");
    CHECK(test::run_cli(base + "--approach2 perturbed:1:20:dilate:brain --out " + fail_dir.string()) == 2);
    CHECK(read_json(fail_dir / "qa_report.json")["verdict"] == "fail");
    // a looser threshold flips the verdict
    const fs::path loose = test::scratch_dir("run_loose");
    CHECK(test::run_cli(base + "--approach2 perturbed:1:20:dilate:brain --threshold 40 --out " + loose.string()) == 0);
}

TEST_CASE("CLI pipeline run: missing structure is an error naming the label")
{
    const fs::path in = test::scratch_dir("cohort_no_c2");
    for (const auto& e : fs::directory_iterator(cohort_dir()))
        if (e.path().filename() != "vertebra_c2.raw") fs::copy_file(e.path(), in / e.path().filename());
    json meta = read_json(in / "meta.json");
    json labels = json::array();
    for (const auto& l : meta["labels"])
        if (l != "vertebra_c2") labels.push_back(l);
    meta["labels"] = labels;
    write_json(in / "meta.json", meta);

    const fs::path out = test::scratch_dir("run_missing");
    const fs::path err = test::scratch_dir("run_missing_err") / "stderr.txt";
    CHECK(test::run_cli("pipeline run --in " + in.string() + " --approach2 perturbed:1:0:dilate --out " + out.string(),
                        err.string()) == 1);
    const std::string msg = slurp(err);
    CHECK(msg.find("vertebra_c2") != std::string::npos);
    CHECK(msg.find("missing-structure") != std::string::npos);
    CHECK(fs::is_empty(out));
}

TEST_CASE("partial outputs are removed when a write fails")
{
    const fs::path out = test::scratch_dir("run_partial");
    fs::create_directories(out / "qa_report.json" / "blocker");  // a directory where a file must go
    PipelineConfig cfg;
    cfg.approach2 = parse_approach2("perturbed:1:0:dilate");
    CHECK_THROWS(pipeline_run(cohort_dir(), cfg, out));
    CHECK_FALSE(fs::exists(out / "landmarks_1.json"));
    CHECK_FALSE(fs::exists(out / "aperture_2.json"));
}

TEST_CASE("CLI usage errors")
{
    CHECK(test::run_cli("batch run --seeds '' --out " + test::scratch_dir("empty_seeds").string()) == 1);
    CHECK(test::run_cli("pipeline run --in /nonexistent --out /tmp/x") == 1);
    CHECK(test::run_cli("frobnicate") == 1);
    CHECK(test::run_cli("--help") == 0);
}

TEST_CASE("batch summary")
{
    const fs::path out = test::scratch_dir("batch");
    REQUIRE(test::run_cli("batch run --seeds 1..2 --approach2 perturbed:1:0:dilate --threads 2 --out " + out.string()) == 0);
    const json s = read_json(out / "summary.json");
    CHECK(s["cases_total"] == 2);
    CHECK(s["cases_ok"] == 2);
    CHECK(s["hausdorff"]["mean"] == 0.0);
    CHECK(fs::exists(out / "case_1" / "qa_report.json"));
    CHECK(fs::exists(out / "case_2" / "aperture_2.json"));
    CHECK_FALSE(s["config"].contains("output_dir"));
}
