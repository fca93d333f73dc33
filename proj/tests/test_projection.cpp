#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "wbrt/contour.hpp"
#include "wbrt/errors.hpp"
#include "wbrt/metrics.hpp"
#include "wbrt/morphology.hpp"
#include "wbrt/projection.hpp"

using namespace wbrt;

namespace {

Polygon2D outline(const BevSilhouette& s)
{
    const auto rings = extract_contour(s);
    const Polyline2D* best = nullptr;
    for (const auto& r : rings)
        if (!best || signed_area(r.pts) > signed_area(best->pts)) best = &r;
    return make_polygon(best->pts);
}

bool subset(const BevSilhouette& a, const BevSilhouette& b)
{
    for (std::size_t i = 0; i < a.bits.size(); ++i)
        if (a.bits[i] && !b.bits[i]) return false;
    return true;
}

}  // namespace

TEST_CASE("default frame keeps the border and sits on the lattice")
{
    const BevFrame& f = test::default_bev_frame();
    const auto skin = extrema(*test::default_silhouettes().find("skin"));
    REQUIRE(skin);
    CHECK(skin->min_u - f.u_lo() >= 50 - 1e-9);
    CHECK(f.u_hi() - skin->max_u >= 50 - 1e-9);
    CHECK(skin->min_v - f.v_lo() >= 50 - 1e-9);
    CHECK(f.v_hi() - skin->max_v >= 50 - 1e-9);
    CHECK(f.u0 == std::round(f.u0));
    CHECK(f.v0 == std::round(f.v0));
    CHECK_THROWS_AS(default_frame(*test::default_phantom().cohort.find("skin"), 1.0, 20), Error);
}

TEST_CASE("projected silhouettes match the analytic shapes")
{
    const SilhouetteSet& s = test::default_silhouettes();
    const SilhouetteSet o = oracle_silhouettes(test::default_phantom().oracle, s.frame);
    for (const std::string label : {"brain", "eye_left", "lens_right", "vertebra_c2"}) {
        const auto d = surface_distances(outline(*s.find(label)), outline(*o.find(label)));
        CHECK_MESSAGE(d.hausdorff <= 1.5, label);
    }
    CHECK(s.provenance == Provenance::approach1);
}

TEST_CASE("unions are monotone over their parts")
{
    const SilhouetteSet& s = test::default_silhouettes();
    REQUIRE(s.has("eye"));
    REQUIRE(s.has("lens"));
    CHECK(subset(*s.find("eye_left"), *s.find("eye")));
    CHECK(subset(*s.find("eye_right"), *s.find("eye")));
    CHECK(subset(*s.find("lens_left"), *s.find("lens")));
    // the lateral beam puts both lenses on the same rays
    CHECK(s.find("lens")->count() >= s.find("lens_left")->count());
}

TEST_CASE("empty mask projects to an empty silhouette")
{
    StructureMask m = *test::default_phantom().cohort.find("brain");
    std::fill(m.bits.begin(), m.bits.end(), 0);
    const BevSilhouette s = project(m, BeamGeometry{}, test::default_bev_frame());
    CHECK(s.count() == 0);
    BeamGeometry g;
    g.gantry_deg = 0;
    CHECK_THROWS_AS(project(m, g, test::default_bev_frame()), Error);
}

TEST_CASE("export and ingest round trip")
{
    const SilhouetteSet& s = test::default_silhouettes();
    const auto dir = test::scratch_dir("bev_roundtrip");
    export_bev(s, dir);
    CHECK(std::filesystem::exists(dir / "brain.pgm"));
    CHECK(std::filesystem::exists(dir / "bev_meta.json"));
    CHECK(same_frame(read_bev_frame(dir), s.frame));
    const SilhouetteSet back = ingest_bev_masks(dir, s.frame, {"brain", "skin"});
    for (const auto& [label, sil] : s.items) {
        REQUIRE_MESSAGE(back.find(label), label);
        CHECK_MESSAGE(back.find(label)->bits == sil.bits, label);
    }
}

TEST_CASE("finer masks are resampled onto the pipeline frame")
{
    const BevFrame& f = test::default_bev_frame();
    const BevFrame fine{f.u0 - 0.25, f.v0 - 0.25, 0.5, 2 * f.cols, 2 * f.rows};
    const PhantomOracle& o = test::default_phantom().oracle;
    const auto dir = test::scratch_dir("bev_fine");
    export_bev(oracle_silhouettes(o, fine), dir);
    const SilhouetteSet got = ingest_bev_masks(dir, f);
    const SilhouetteSet want = oracle_silhouettes(o, f);
    for (const std::string label : {"brain", "skin", "eye_left", "vertebra_c1"}) {
        const auto d = surface_distances(outline(*got.find(label)), outline(*want.find(label)));
        // nearest-neighbour resampling can move an edge by one pixel diagonally
        CHECK_MESSAGE(d.hausdorff <= std::sqrt(2.0) + 1e-9, label);
    }
    const BevFrame odd{f.u0, f.v0, 0.7, f.cols, f.rows};
    CHECK_THROWS_AS(ingest_bev_masks(dir, odd), Error);
}

TEST_CASE("missing required mask names the label")
{
    SilhouetteSet s = test::default_silhouettes();
    s.items.erase("lens_left");
    s.items.erase("lens_right");
    s.items.erase("lens");
    const auto dir = test::scratch_dir("bev_missing");
    export_bev(s, dir);
    try {
        ingest_bev_masks(dir, s.frame, {"brain", "lens"});
        FAIL("expected missing_structure");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::missing_structure);
        CHECK(std::string(e.what()).find("lens") != std::string::npos);
    }
}

TEST_CASE("perturbations")
{
    const SilhouetteSet& s = test::default_silhouettes();

    const SilhouetteSet same = perturb(s, 1, 0.0, PerturbKind::dilate);
    for (const auto& [label, sil] : s.items) CHECK_MESSAGE(same.find(label)->bits == sil.bits, label);
    CHECK(same.provenance == Provenance::approach2_perturbed);

    const SilhouetteSet big = perturb(s, 1, 20.0, PerturbKind::dilate, {"brain"});
    CHECK(big.find("brain")->bits == dilate(*s.find("brain"), 20.0).bits);
    CHECK(big.find("skin")->bits == s.find("skin")->bits);

    try {
        perturb(s, 1, 10.0, PerturbKind::erode, {"lens"});
        FAIL("expected degenerate_perturbation");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::degenerate_perturbation);
    }

    const SilhouetteSet j1 = perturb(s, 9, 3.0, PerturbKind::boundary_jitter);
    const SilhouetteSet j2 = perturb(s, 9, 3.0, PerturbKind::boundary_jitter);
    const SilhouetteSet j3 = perturb(s, 10, 3.0, PerturbKind::boundary_jitter);
    CHECK(j1.find("brain")->bits == j2.find("brain")->bits);
    CHECK(j1.find("brain")->bits != j3.find("brain")->bits);
    const auto d = surface_distances(outline(*j1.find("brain")), outline(*s.find("brain")));
    CHECK(d.hausdorff <= 3.0 + 1.5);
    CHECK(d.hausdorff > 0.5);
    // unions follow their perturbed sides
    CHECK(subset(*j1.find("eye_left"), *j1.find("eye")));

    CHECK(parse_perturb_kind("jitter") == PerturbKind::boundary_jitter);
    CHECK_THROWS_AS(parse_perturb_kind("shrink"), Error);
    CHECK_THROWS_AS(perturb(s, 1, -1.0, PerturbKind::dilate), Error);
}
