#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "support.hpp"
#include "wbrt/contour.hpp"
#include "wbrt/drr.hpp"
#include "wbrt/errors.hpp"
#include "wbrt/metrics.hpp"

using namespace wbrt;

namespace {

// Slab of `hu` between x = -20 and x = 19 (40 voxel centers), air elsewhere.
CtVolume slab(std::int16_t hu)
{
    CtVolume v;
    v.dims = {64, 32, 32};
    v.frame.origin = {-32, -16, -16};
    v.hu.assign(voxel_count(v.dims), -1000);
    for (int k = 0; k < 32; ++k)
        for (int j = 0; j < 32; ++j)
            for (int i = 12; i < 52; ++i) v.hu[voxel_index(v.dims, i, j, k)] = hu;
    return v;
}

const BevFrame kSmall{-8, -8, 1.0, 17, 17};

const DrrImage& default_drr()
{
    static const DrrImage img = render(test::default_phantom().cohort.ct, BeamGeometry{}, test::default_bev_frame());
    return img;
}

Polygon2D outline(const BevSilhouette& s)
{
    const auto rings = extract_contour(s);
    const Polyline2D* best = nullptr;
    for (const auto& r : rings)
        if (!best || signed_area(r.pts) > signed_area(best->pts)) best = &r;
    return make_polygon(best->pts);
}

}  // namespace

TEST_CASE("water slab path and display value")
{
    const DrrImage img = render(slab(0), BeamGeometry{}, kSmall);
    const double expect = 40 * 0.02;
    for (double p : img.path) CHECK(p == doctest::Approx(expect).epsilon(1e-6));
    const double d = 65535.0 * (1.0 - std::exp(-expect));
    for (auto v : img.display) CHECK(std::fabs(v - d) <= 1.0);
}

TEST_CASE("path is linear in attenuation")
{
    const DrrImage a = render(slab(0), BeamGeometry{}, kSmall);
    const DrrImage b = render(slab(1000), BeamGeometry{}, kSmall);
    DrrOptions half;
    half.mu_water = 0.01;
    const DrrImage c = render(slab(0), BeamGeometry{}, kSmall, half);
    for (std::size_t i = 0; i < a.path.size(); ++i) {
        CHECK(b.path[i] == doctest::Approx(2 * a.path[i]));
        CHECK(c.path[i] == doctest::Approx(0.5 * a.path[i]));
    }
    // below -1000 HU clamps to zero attenuation
    const DrrImage air = render(slab(-1000), BeamGeometry{}, kSmall);
    CHECK(*std::max_element(air.path.begin(), air.path.end()) == 0.0);
}

TEST_CASE("divergent beam through a thin slab is close to parallel")
{
    BeamGeometry div;
    div.mode = ProjectionMode::divergent;
    const DrrImage p = render(slab(0), BeamGeometry{}, kSmall);
    const DrrImage d = render(slab(0), div, kSmall);
    // obliquity at 8 mm off axis with SAD 1000 is below 1e-4
    for (std::size_t i = 0; i < p.path.size(); ++i) CHECK(d.path[i] == doctest::Approx(p.path[i]).epsilon(1e-3));
}

TEST_CASE("step halving and thread count do not change the image")
{
    const CtVolume& ct = test::default_phantom().cohort.ct;
    const BevFrame f{-20, -40, 1.0, 41, 41};
    DrrOptions a, b, c;
    a.step = 0.5;
    a.threads = 1;
    b.step = 0.25;
    b.threads = 1;
    c.step = 0.5;
    c.threads = 3;
    const DrrImage ia = render(ct, BeamGeometry{}, f, a), ib = render(ct, BeamGeometry{}, f, b),
                   ic = render(ct, BeamGeometry{}, f, c);
    int worst = 0;
    for (std::size_t i = 0; i < ia.display.size(); ++i) worst = std::max(worst, std::abs(ia.display[i] - ib.display[i]));
    CHECK(worst <= 1);
    CHECK(ia.path == ic.path);
    CHECK(ia.display == ic.display);
}

TEST_CASE("threshold segmentation recovers skin and vertebrae")
{
    const DrrImage& img = default_drr();
    const SilhouetteSet& ref = test::default_silhouettes();

    const BevSilhouette skin = threshold_segment(img, "skin", {0.0});
    const DistanceReport d = surface_distances(outline(skin), outline(*ref.find("skin")));
    CHECK(d.hausdorff <= 2.0);

    for (const std::string label : {"vertebra_c1", "vertebra_c2"}) {
        const auto got = extrema(threshold_segment(img, label, {2.8}));
        const auto want = extrema(*ref.find(label));
        REQUIRE(got);
        CHECK(std::fabs(got->min_v - want->min_v) <= 1.0);
        CHECK(std::fabs(got->max_v - want->max_v) <= 1.0);
        CHECK(std::fabs(got->min_u - want->min_u) <= 1.0);
        CHECK(std::fabs(got->max_u - want->max_u) <= 1.0);
    }
}

TEST_CASE("DRR argument errors")
{
    const CtVolume v = slab(0);
    BeamGeometry g;
    g.gantry_deg = 90;
    CHECK_THROWS_AS(render(v, g, kSmall), Error);
    BeamGeometry close;
    close.mode = ProjectionMode::divergent;
    close.sad = 10;
    CHECK_THROWS_AS(render(v, close, kSmall), Error);
    CHECK_THROWS_AS(render(v, BeamGeometry{}, BevFrame{500, 500, 1.0, 4, 4}), Error);
    CHECK_THROWS_AS(parse_mode("cone"), Error);

    const DrrImage img = render(v, BeamGeometry{}, kSmall);
    try {
        threshold_segment(img, "skin", {5.0, 6.0});
        FAIL("expected a segmentation failure");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::segmentation_failure);
    }
    CHECK_THROWS_AS(threshold_segment(img, "skin", {2.0, 1.0}), Error);
}

TEST_CASE("16-bit PGM output")
{
    const DrrImage img = render(slab(0), BeamGeometry{}, kSmall);
    const std::string pgm = encode_drr_pgm(img);
    CHECK(pgm.rfind("P5\n17 17\n65535\n", 0) == 0);
    CHECK(pgm.size() == std::string("P5\n17 17\n65535\n").size() + 2 * 17 * 17);
    const json meta = drr_meta(img, BeamGeometry{}, DrrOptions{});
    CHECK(meta["frame"]["cols"] == 17);
    CHECK(meta["beam"]["mode"] == "parallel");
}
