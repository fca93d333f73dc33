#include <doctest.h>

#include "support.hpp"
#include "wbrt/aperture.hpp"
#include "wbrt/contour.hpp"
#include "wbrt/errors.hpp"
#include "wbrt/metrics.hpp"

using namespace wbrt;

namespace {

AperturePolygon default_aperture(const ApertureConfig& cfg = {})
{
    const SilhouetteSet& s = test::default_silhouettes();
    return build(compute_landmarks(s, cfg), s.frame);
}

}  // namespace

TEST_CASE("vertex order and names")
{
    ApertureConfig c;
    c.cd_de = CdDe::straight;
    const AperturePolygon p = default_aperture(c);
    CHECK(p.names == std::vector<std::string>{"A", "B", "C", "E", "F", "G", "H", "I"});
    CHECK(p.boundary.pts.size() == 8);
    CHECK(p.boundary.pts[6] == Vec2{-112, 120});  // H
    CHECK(polygon_problems(p.boundary.pts).empty());

    const AperturePolygon q = default_aperture();
    CHECK(q.boundary.pts.size() > 8);
    CHECK(std::count(q.names.begin(), q.names.end(), "D") == 1);
    CHECK(signed_area(q.boundary.pts) != 0);
}

TEST_CASE("area grows with the margins")
{
    ApertureConfig a, b;
    a.brain_margin = 10;
    b.brain_margin = 20;
    CHECK(area(default_aperture(b)) > area(default_aperture(a)));
    a = b = ApertureConfig{};
    a.skin_flash = 10;
    b.skin_flash = 20;
    CHECK(area(default_aperture(b)) > area(default_aperture(a)));
}

TEST_CASE("rasterization at pixel centers")
{
    const BevFrame f{0, 0, 1.0, 20, 20};
    // edges on half-pixel lines: exactly 10 x 10 centers inside
    const auto sq = rasterize_ring({{1.5, 1.5}, {11.5, 1.5}, {11.5, 11.5}, {1.5, 11.5}}, f, "sq");
    CHECK(sq.count() == 100);
    // edges through pixel centers: boundary centers are inside, 11 x 11
    const auto on = rasterize_ring({{2, 2}, {12, 2}, {12, 12}, {2, 12}}, f, "on");
    CHECK(on.count() == 121);
    // a triangle's slanted edge through centers
    CHECK(rasterize_ring({{0, 0}, {4, 0}, {0, 4}}, f, "tri").count() == 15);
    // partly outside the frame is clipped
    CHECK(rasterize_ring({{-5.5, -5.5}, {4.5, -5.5}, {4.5, 4.5}, {-5.5, 4.5}}, f, "clip").count() == 25);
    CHECK(rasterize_ring({{-5, -5}, {4, -5}, {4, 4}, {-5, 4}}, f, "clip_on").count() == 25);
}

TEST_CASE("raster round trip stays within a pixel")
{
    const AperturePolygon p = default_aperture();
    const BevSilhouette r = rasterize(p, p.frame);
    const auto rings = extract_contour(r);
    REQUIRE(rings.size() == 1);
    const DistanceReport d = surface_distances(make_polygon(rings[0].pts), p.boundary);
    CHECK(d.hausdorff <= 1.0);
    CHECK(std::fabs(double(r.count()) - area(p)) / area(p) < 0.01);

    const BevFrame tiny{0, 0, 1.0, 10, 10};
    CHECK_THROWS_AS(rasterize(p, tiny), Error);
}

TEST_CASE("covers the expanded brain and blocks the lenses")
{
    const SilhouetteSet& s = test::default_silhouettes();
    const AperturePolygon p = default_aperture();
    const BevSilhouette r = rasterize(p, p.frame);
    const BevSilhouette& brain = *s.find("brain");
    const BevSilhouette& lens = *s.find("lens");
    std::size_t brain_out = 0, lens_in = 0;
    for (std::size_t i = 0; i < r.bits.size(); ++i) {
        brain_out += brain.bits[i] && !r.bits[i];
        lens_in += lens.bits[i] && r.bits[i];
    }
    CHECK(brain_out == 0);
    CHECK(lens_in == 0);
}

TEST_CASE("aperture JSON round trip")
{
    const AperturePolygon p = default_aperture();
    const json j = to_json(p);
    CHECK(j["vertices"].size() == p.boundary.pts.size());
    CHECK(j["vertices"][0]["name"] == "A");
    const AperturePolygon back = aperture_from_json(j);
    CHECK(back.names == p.names);
    REQUIRE(back.boundary.pts.size() == p.boundary.pts.size());
    for (std::size_t i = 0; i < p.boundary.pts.size(); ++i) {
        CHECK(back.boundary.pts[i].u == doctest::Approx(p.boundary.pts[i].u).epsilon(1e-9));
        CHECK(back.boundary.pts[i].v == doctest::Approx(p.boundary.pts[i].v).epsilon(1e-9));
    }
    CHECK(to_json(back) == j);
    CHECK(to_svg(p).find("<svg") != std::string::npos);
}
