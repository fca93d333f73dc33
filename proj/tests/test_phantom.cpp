#include <doctest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"
#include "wbrt/errors.hpp"
#include "wbrt/phantom.hpp"

using namespace wbrt;

namespace {

int hu_at(const Cohort& c, Vec3 p)
{
    const auto& f = c.ct.frame;
    const int i = static_cast<int>(std::lround((p.x - f.origin.x) / f.spacing.x));
    const int j = static_cast<int>(std::lround((p.y - f.origin.y) / f.spacing.y));
    const int k = static_cast<int>(std::lround((p.z - f.origin.z) / f.spacing.z));
    return c.ct.hu[voxel_index(c.ct.dims, i, j, k)];
}

std::size_t count(const StructureMask& m)
{
    std::size_t n = 0;
    for (auto b : m.bits) n += b;
    return n;
}

}  // namespace

TEST_CASE("default spec is valid and feasible")
{
    const PhantomSpec s;
    CHECK(validate(s).empty());
    CHECK(landmark_feasibility(s).empty());
}

TEST_CASE("containment violations are reported")
{
    PhantomSpec s;
    s.brain = {80, 100, 110};
    CHECK_FALSE(validate(s).empty());
    s = PhantomSpec{};
    s.lens_offset = 10;  // lens pokes out of the eye
    CHECK_FALSE(validate(s).empty());
    s = PhantomSpec{};
    s.c1.center.z = -55;  // overlaps C2
    CHECK_FALSE(validate(s).empty());
    CHECK_THROWS_AS(generate(s, fit_grid(PhantomSpec{})), Error);
}

TEST_CASE("randomize is deterministic and valid")
{
    const PhantomSpec base;
    const auto a = randomize(7, base), b = randomize(7, base), c = randomize(8, base);
    CHECK(to_json(a) == to_json(b));
    CHECK(to_json(a) != to_json(c));
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const auto s = randomize(seed, base);
        CHECK(validate(s).empty());
        CHECK(landmark_feasibility(s).empty());
    }
}

TEST_CASE("default grid is 256 cubed at 1 mm")
{
    const Grid g = fit_grid(PhantomSpec{});
    CHECK(g.dims[0] == 256);
    CHECK(g.dims[1] == 256);
    CHECK(g.dims[2] == 256);
    CHECK(g.frame.origin.x == -128);
    CHECK(g.frame.spacing.y == 1);
}

TEST_CASE("CT values and masks agree")
{
    const Phantom& ph = test::default_phantom();
    const PhantomSpec& s = ph.spec;
    const Cohort& c = ph.cohort;
    REQUIRE(c.masks.size() == 8);
    CHECK(hu_at(c, {0, 0, 0}) == 35);                 // inside brain
    CHECK(hu_at(c, s.eye(1)) == 30);
    CHECK(hu_at(c, s.lens(-1)) == 60);
    CHECK(hu_at(c, s.c1.center) == 1200);
    CHECK(hu_at(c, {0, 0, s.head.z - 2}) == 700);     // shell
    CHECK(hu_at(c, {0, 0, s.head.z + 5}) == -1000);   // air

    const std::map<std::string, int> hu = {{"skin", 700},         {"brain", 35},       {"eye_left", 30},
                                           {"eye_right", 30},     {"lens_left", 60},   {"lens_right", 60},
                                           {"vertebra_c1", 1200}, {"vertebra_c2", 1200}};
    for (const auto& m : c.masks) {
        bool ok = true;
        for (std::size_t i = 0; i < m.bits.size() && ok; ++i)
            if (m.bits[i]) ok = c.ct.hu[i] == hu.at(m.label);
        CHECK_MESSAGE(ok, m.label);
    }

    // voxel volumes against the analytic solids
    const double lens_v = 4.0 / 3.0 * std::numbers::pi * 64;
    const double eye_v = 4.0 / 3.0 * std::numbers::pi * 1728 - lens_v;
    CHECK(std::fabs(count(*c.find("eye_left")) - eye_v) / eye_v < 0.03);
    CHECK(std::fabs(count(*c.find("lens_left")) - lens_v) / lens_v < 0.1);
    CHECK(count(*c.find("vertebra_c1")) == 61 * 31 * 16);  // closed box, both z faces on the lattice
}

TEST_CASE("oracle shapes follow the BEV mapping")
{
    const PhantomOracle& o = test::default_phantom().oracle;
    const auto& eye = o.shapes.at("eye_left");
    CHECK(eye.kind == "disk");
    CHECK(eye.center.u == 58);
    CHECK(eye.center.v == -25);
    CHECK(eye.ext.min_v == -37);
    const auto& brain = o.shapes.at("brain");
    CHECK(brain.ext.min_u == -83);
    CHECK(brain.ext.max_u == 67);
    CHECK(brain.ext.max_v == 81);
    CHECK(o.shapes.at("vertebra_c2").ext.min_v == -70);
}

TEST_CASE("spec and oracle JSON round trip")
{
    const auto s = randomize(3, PhantomSpec{});
    CHECK(to_json(spec_from_json(to_json(s))) == to_json(s));
    const auto o = make_oracle(s);
    CHECK(to_json(oracle_from_json(to_json(o))) == to_json(o));
    json bad = to_json(s);
    bad.erase("head_semi_axes");
    CHECK_THROWS_AS(spec_from_json(bad), Error);
}
