#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "support.hpp"
#include "wbrt/contour.hpp"
#include "wbrt/errors.hpp"
#include "wbrt/geometry.hpp"
#include "wbrt/morphology.hpp"
#include "wbrt/pnm.hpp"
#include "wbrt/util.hpp"
#include "wbrt/volume.hpp"

using namespace wbrt;

namespace {

std::vector<Vec2> square(double u0, double v0, double side)
{
    return {{u0, v0}, {u0 + side, v0}, {u0 + side, v0 + side}, {u0, v0 + side}};
}

BevSilhouette blank(int cols = 20, int rows = 20)
{
    return BevSilhouette::empty(BevFrame{0, 0, 1.0, cols, rows}, "m");
}

}  // namespace

TEST_CASE("polygon basics")
{
    const auto sq = square(0, 0, 10);
    CHECK(signed_area(sq) == doctest::Approx(100));
    CHECK(ring_length(sq) == doctest::Approx(40));
    CHECK(point_in_polygon({5, 5}, sq));
    CHECK_FALSE(point_in_polygon({15, 5}, sq));
    CHECK(point_segment_distance({5, 3}, {0, 0}, {10, 0}) == doctest::Approx(3));
    CHECK(point_segment_distance({13, 4}, {0, 0}, {10, 0}) == doctest::Approx(5));
    CHECK(segments_intersect({0, 0}, {2, 2}, {0, 2}, {2, 0}));
    CHECK_FALSE(segments_intersect({0, 0}, {1, 0}, {0, 1}, {1, 1}));
    CHECK(segment_segment_distance({0, 0}, {1, 0}, {0, 1}, {1, 1}) == doctest::Approx(1));
    CHECK(segment_segment_distance({0, 0}, {2, 2}, {0, 2}, {2, 0}) == 0.0);
}

TEST_CASE("polygon invariants")
{
    CHECK(polygon_problems(square(0, 0, 1)).empty());
    CHECK_FALSE(polygon_problems({{0, 0}, {1, 0}}).empty());
    CHECK_FALSE(polygon_problems({{0, 0}, {1, 1}, {1, 0}, {0, 1}}).empty());  // bow tie
    CHECK_FALSE(polygon_problems({{0, 0}, {1, 0}, {2, 0}}).empty());          // zero area
    CHECK_THROWS_AS(make_polygon({{0, 0}, {1, 0}, {2, 0}}), Error);
}

TEST_CASE("collinear merge and densify")
{
    const std::vector<Vec2> ring{{0, 0}, {5, 0}, {10, 0}, {10, 10}, {10, 10}, {0, 10}};
    const auto kept = simplify_ring(ring);
    CHECK(kept == std::vector<std::size_t>{0, 2, 3, 5});
    const auto d = densify({{0, 0}, {3, 0}}, 1.0, false);
    REQUIRE(d.size() == 4);
    CHECK(d[1].u == doctest::Approx(1));
    CHECK(d.back().u == 3);
}

TEST_CASE("squared EDT against brute force")
{
    std::mt19937_64 rng(5);
    const int cols = 23, rows = 17;
    std::vector<std::uint8_t> f(cols * rows, 0);
    for (auto& x : f) x = (rng() % 13) == 0;
    const auto d = distance_sq(f, cols, rows);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            double best = 1e30;
            for (int rr = 0; rr < rows; ++rr)
                for (int cc = 0; cc < cols; ++cc)
                    if (f[rr * cols + cc]) best = std::min(best, double((rr - r) * (rr - r) + (cc - c) * (cc - c)));
            CHECK(d[r * cols + c] == best);
        }
}

TEST_CASE("dilate and erode use an exact disk")
{
    BevSilhouette s = blank();
    s.set(10, 10);
    const auto d = dilate(s, 3.0);
    CHECK(d.count() == 29);  // lattice points with i^2 + j^2 <= 9
    CHECK(erode(d, 3.0).count() == 1);
    CHECK(dilate(s, 0.0).bits == s.bits);
}

TEST_CASE("8-connected components")
{
    BevSilhouette s = blank();
    s.set(1, 1);
    s.set(2, 2);  // diagonal neighbour
    for (int c = 10; c < 14; ++c) s.set(c, 10);
    const auto comp = components(s);
    CHECK(comp.sizes.size() == 2);
    const auto big = largest_components(s, 1);
    REQUIRE(big.size() == 1);
    CHECK(big[0].count() == 4);
}

TEST_CASE("marching squares contour")
{
    BevSilhouette one = blank();
    one.set(5, 5);
    auto c = extract_contour(one);
    REQUIRE(c.size() == 1);
    CHECK(signed_area(c[0].pts) == doctest::Approx(0.5));

    BevSilhouette block = blank();
    for (int r = 4; r < 7; ++r)
        for (int col = 4; col < 7; ++col) block.set(col, r);
    block.bits[block.frame.index(5, 5)] = 0;  // hole in the middle
    c = extract_contour(block);
    REQUIRE(c.size() == 2);
    double outer = 0, hole = 0;
    for (const auto& p : c) (signed_area(p.pts) > 0 ? outer : hole) = signed_area(p.pts);
    CHECK(outer == doctest::Approx(8.5));  // 3x3 square with four 1/8 corners cut
    CHECK(hole == doctest::Approx(-0.5));
}

TEST_CASE("extrema at pixel centers")
{
    BevSilhouette s = BevSilhouette::empty(BevFrame{-3, 2, 0.5, 10, 10}, "x");
    s.set(2, 3);
    s.set(7, 8);
    const auto e = extrema(s);
    REQUIRE(e);
    CHECK(e->min_u == -2.0);
    CHECK(e->max_u == 0.5);
    CHECK(e->min_v == 3.5);
    CHECK(e->max_v == 6.0);
    CHECK_FALSE(extrema(blank()));
}

TEST_CASE("util helpers")
{
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(r9(1.0 / 3.0) == 0.333333333);
    CHECK(r9(-0.0) == 0.0);
    CHECK(mix_seed(1, 2) == mix_seed(1, 2));
    CHECK(mix_seed(1, 2) != mix_seed(2, 1));
    CHECK(fnv1a("brain") != fnv1a("skin"));
}

TEST_CASE("PGM round trip keeps the row order")
{
    GrayImage g;
    g.cols = 3;
    g.rows = 2;
    g.maxval = 65535;
    g.px = {0, 1, 2, 300, 40000, 65535};
    const std::string bytes = encode_pgm(g);
    CHECK(bytes.rfind("P5\n3 2\n65535\n", 0) == 0);
    // first stored row is the top row (row index 1), big-endian samples
    CHECK(static_cast<unsigned char>(bytes[13]) == (300 >> 8));
    CHECK(static_cast<unsigned char>(bytes[14]) == (300 & 255));
    const GrayImage back = decode_pgm(bytes);
    CHECK(back.px == g.px);
    CHECK_THROWS_AS(decode_pgm("P5\n3 2\n255\nab"), Error);
}

TEST_CASE("cohort container round trip and format errors")
{
    Cohort c;
    c.ct.dims = {4, 3, 2};
    c.ct.frame.origin = {-2, -1, 0};
    c.ct.hu.assign(voxel_count(c.ct.dims), -1000);
    c.ct.hu[5] = 40;
    StructureMask m;
    m.frame = c.ct.frame;
    m.dims = c.ct.dims;
    m.label = "brain";
    m.bits.assign(voxel_count(m.dims), 0);
    m.bits[5] = 1;
    c.masks.push_back(m);
    const auto dir = test::scratch_dir("cohort");
    write_cohort(c, dir);
    const Cohort back = read_cohort(dir);
    CHECK(back.ct.hu == c.ct.hu);
    REQUIRE(back.find("brain"));
    CHECK(back.find("brain")->bits == m.bits);

    auto meta = read_json(dir / "meta.json");
    SUBCASE("unknown label")
    {
        meta["labels"].push_back("spleen");
        write_json(dir / "meta.json", meta);
        try {
            read_cohort(dir);
            FAIL("expected a format error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::format);
            CHECK(std::string(e.what()).find("spleen") != std::string::npos);
        }
    }
    SUBCASE("oblique direction")
    {
        meta["direction"] = {1, 0, 0, 0, 0.8, 0.6, 0, -0.6, 0.8};
        write_json(dir / "meta.json", meta);
        CHECK_THROWS_AS(read_cohort(dir), Error);
    }
    SUBCASE("short ct.raw")
    {
        write_file_atomic(dir / "ct.raw", std::string(10, '\0'));
        try {
            read_cohort(dir);
            FAIL("expected a format error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::format);
            CHECK(std::string(e.what()).find("24") != std::string::npos);
        }
    }
}
