#include "wbrt/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "wbrt/errors.hpp"

namespace wbrt {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<Vec3> sphere_dirs(int n)
{
    std::vector<Vec3> out;
    out.reserve(n);
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / n;
        const double r = std::sqrt(1.0 - z * z);
        out.push_back({r * std::cos(golden * i), r * std::sin(golden * i), z});
    }
    // the six axis poles carry the extrema of axis-aligned solids
    for (Vec3 p : {Vec3{1, 0, 0}, Vec3{-1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, -1, 0}, Vec3{0, 0, 1}, Vec3{0, 0, -1}})
        out.push_back(p);
    return out;
}

const std::vector<Vec3>& dirs()
{
    static const std::vector<Vec3> d = sphere_dirs(4096);
    return d;
}

double implicit(Vec3 p, Vec3 c, Vec3 a)
{
    const double dx = (p.x - c.x) / a.x, dy = (p.y - c.y) / a.y, dz = (p.z - c.z) / a.z;
    return dx * dx + dy * dy + dz * dz;
}

// Surface of the ellipsoid (c, a + margin) strictly inside the ellipsoid (c2, a2).
bool ellipsoid_inside(Vec3 c, Vec3 a, double margin, Vec3 c2, Vec3 a2)
{
    for (const Vec3& d : dirs()) {
        const Vec3 p{c.x + (a.x + margin) * d.x, c.y + (a.y + margin) * d.y, c.z + (a.z + margin) * d.z};
        if (implicit(p, c2, a2) >= 1.0) return false;
    }
    return true;
}

bool sphere_outside(Vec3 c, double r, double margin, Vec3 c2, Vec3 a2)
{
    if (implicit(c, c2, a2) <= 1.0) return false;
    for (const Vec3& d : dirs()) {
        const Vec3 p{c.x + (r + margin) * d.x, c.y + (r + margin) * d.y, c.z + (r + margin) * d.z};
        if (implicit(p, c2, a2) <= 1.0) return false;
    }
    return true;
}

bool box_inside(const BoxSolid& b, double margin, Vec3 c2, Vec3 a2)
{
    for (int sx : {-1, 1})
        for (int sy : {-1, 1})
            for (int sz : {-1, 1}) {
                const Vec3 p{b.center.x + sx * (b.extent.x / 2 + margin), b.center.y + sy * (b.extent.y / 2 + margin),
                             b.center.z + sz * (b.extent.z / 2 + margin)};
                if (implicit(p, c2, a2) >= 1.0) return false;
            }
    return true;
}

Vec3 interior(const PhantomSpec& s) { return {s.head.x - s.shell, s.head.y - s.shell, s.head.z - s.shell}; }

bool positive(Vec3 v) { return v.x > 0 && v.y > 0 && v.z > 0; }

// Lowest v of the brain silhouette dilated by m on the line u; +inf if the line misses it.
double expanded_low(const PhantomSpec& s, double m, double u)
{
    const double cu = -s.brain_center.y, cv = s.brain_center.z, a = s.brain.y, b = s.brain.z;
    double best = INFINITY;
    const int n = 7200;
    for (int i = 0; i < n; ++i) {
        const double t = 2.0 * kPi * i / n;
        const double du = cu + a * std::cos(t) - u;
        if (std::fabs(du) > m) continue;
        best = std::min(best, cv + b * std::sin(t) - std::sqrt(m * m - du * du));
    }
    return best;
}

}  // namespace

std::vector<std::string> validate(const PhantomSpec& s)
{
    std::vector<std::string> bad;
    if (!positive(s.head)) bad.push_back("head semi-axes must be > 0");
    if (!(s.shell > 0 && s.shell < std::min({s.head.x, s.head.y, s.head.z})))
        bad.push_back("skull shell thickness must lie in (0, smallest head semi-axis)");
    if (!positive(s.brain)) bad.push_back("brain semi-axes must be > 0");
    if (!(s.eye_r > 0)) bad.push_back("eye radius must be > 0");
    if (!(s.lens_r > 0)) bad.push_back("lens radius must be > 0");
    if (!(s.lens_offset >= 0)) bad.push_back("lens anterior offset must be >= 0");
    if (!positive(s.c1.extent) || !positive(s.c2.extent)) bad.push_back("vertebra extents must be > 0");
    if (!bad.empty()) return bad;

    const Vec3 in = interior(s);
    if (!(s.lens_offset + s.lens_r < s.eye_r)) bad.push_back("lenses strictly inside eyes");
    if (!(s.eye_center.x > s.eye_r)) bad.push_back("eyes must not overlap each other");
    if (!(s.eye_center.y < s.brain_center.y && s.eye_center.z < s.brain_center.z))
        bad.push_back("eyes anterior-inferior of brain center");
    for (int side : {1, -1})
        if (!sphere_outside(s.eye(side), s.eye_r, 0.5, s.brain_center, s.brain)) {
            bad.push_back("eyes strictly outside brain");
            break;
        }
    if (!ellipsoid_inside(s.brain_center, s.brain, 0.5, {0, 0, 0}, in))
        bad.push_back("brain strictly inside skull interior");
    for (int side : {1, -1})
        if (!ellipsoid_inside(s.eye(side), {s.eye_r, s.eye_r, s.eye_r}, 0.5, {0, 0, 0}, in)) {
            bad.push_back("eyes strictly inside skull interior");
            break;
        }
    if (!box_inside(s.c1, 0.5, {0, 0, 0}, in)) bad.push_back("vertebra_c1 strictly inside skull interior");
    if (!box_inside(s.c2, 0.5, {0, 0, 0}, in)) bad.push_back("vertebra_c2 strictly inside skull interior");
    const double c1_bottom = s.c1.center.z - s.c1.extent.z / 2, c2_top = s.c2.center.z + s.c2.extent.z / 2;
    if (!(c1_bottom > c2_top)) bad.push_back("C1 superior to C2");
    const double brain_bottom = s.brain_center.z - s.brain.z;
    if (!(s.c1.center.z + s.c1.extent.z / 2 < brain_bottom && c2_top < brain_bottom))
        bad.push_back("vertebrae inferior to brain");
    return bad;
}

std::vector<std::string> landmark_feasibility(const PhantomSpec& s)
{
    // default configuration: brain margin 15, vertebra and orbit margins 3
    const double m = 15, vm = 3, om = 3;
    std::vector<std::string> bad;
    const double cu = -s.brain_center.y;
    const double eye_u = -s.eye_center.y;
    const double u_ep = eye_u - s.eye_r;
    const double u_lp = eye_u + s.lens_offset - s.lens_r;
    const double lens_top = s.eye_center.z + s.lens_r;
    const double eye_top = s.eye_center.z + s.eye_r;
    for (const BoxSolid* b : {&s.c1, &s.c2}) {
        const std::string name = b == &s.c1 ? "C1" : "C2";
        const double u_vert = -(b->center.y - b->extent.y / 2) + vm;
        if (!(u_vert <= u_ep - 3)) bad.push_back(name + " anterior face posterior of the eyes");
        if (!(u_vert >= cu + 1)) bad.push_back("expanded brain descends toward the " + name + " line");
        if (!(expanded_low(s, m, u_vert) >= b->center.z - b->extent.z / 2 + 1))
            bad.push_back("expanded brain above the " + name + " caudal border");
    }
    if (!(u_lp + 1 <= cu + s.brain.y + m - 5)) bad.push_back("lens posterior pole within the expanded brain span");
    if (!(expanded_low(s, m, u_lp - 1) >= lens_top + 1.5)) bad.push_back("expanded brain clears the lens");
    if (!(expanded_low(s, m, u_lp + 1) <= eye_top + om - 1.5)) bad.push_back("expanded brain below the orbit line");
    return bad;
}

PhantomSpec randomize(std::uint64_t seed, const PhantomSpec& base)
{
    const auto base_bad = validate(base);
    if (!base_bad.empty()) fail(ErrorKind::validation, "base phantom spec invalid: " + base_bad.front());
    std::mt19937_64 rng(mix_seed(seed, 0x5eed));
    auto f = [&] { return 0.9 + 0.2 * unit_double(rng()); };
    auto j3 = [&](Vec3 v) {
        const double a = f(), b = f(), c = f();
        return Vec3{v.x * a, v.y * b, v.z * c};
    };
    for (int attempt = 0; attempt < 1000; ++attempt) {
        PhantomSpec s = base;
        s.seed = seed;
        s.head = j3(base.head);
        s.shell = base.shell * f();
        s.brain_center = j3(base.brain_center);
        s.brain = j3(base.brain);
        s.eye_r = base.eye_r * f();
        s.eye_center = j3(base.eye_center);
        s.lens_r = base.lens_r * f();
        s.lens_offset = base.lens_offset * f();
        s.c1.center = j3(base.c1.center);
        s.c1.extent = j3(base.c1.extent);
        s.c2.center = j3(base.c2.center);
        s.c2.extent = j3(base.c2.extent);
        if (validate(s).empty() && landmark_feasibility(s).empty()) return s;
    }
    fail(ErrorKind::internal, "randomize: no valid phantom after 1000 attempts for seed " + std::to_string(seed));
}

Grid fit_grid(const PhantomSpec& spec, double spacing, int min_dim, double border)
{
    if (!(spacing > 0)) fail(ErrorKind::argument, "grid spacing must be > 0");
    Grid g;
    const double half[3] = {spec.head.x + border, spec.head.y + border, spec.head.z + border};
    double origin[3];
    for (int a = 0; a < 3; ++a) {
        int n = std::max(min_dim, 2 * static_cast<int>(std::ceil(half[a] / spacing + 1.0)));
        if (n % 2) ++n;
        g.dims[a] = n;
        origin[a] = -(n / 2) * spacing;
    }
    g.frame.origin = {origin[0], origin[1], origin[2]};
    g.frame.spacing = {spacing, spacing, spacing};
    return g;
}

namespace {

struct IndexRange {
    int lo;
    int hi;
};

IndexRange index_range(double lo_mm, double hi_mm, double origin, double spacing, int n)
{
    const int lo = std::max(0, static_cast<int>(std::ceil((lo_mm - origin) / spacing - 1e-9)));
    const int hi = std::min(n - 1, static_cast<int>(std::floor((hi_mm - origin) / spacing + 1e-9)));
    return {lo, hi};
}

template <class Inside, class Paint>
void voxelize(const Grid& g, Vec3 lo, Vec3 hi, Inside inside, Paint paint)
{
    const auto& f = g.frame;
    const IndexRange ri = index_range(lo.x, hi.x, f.origin.x, f.spacing.x, g.dims[0]);
    const IndexRange rj = index_range(lo.y, hi.y, f.origin.y, f.spacing.y, g.dims[1]);
    const IndexRange rk = index_range(lo.z, hi.z, f.origin.z, f.spacing.z, g.dims[2]);
    for (int k = rk.lo; k <= rk.hi; ++k)
        for (int j = rj.lo; j <= rj.hi; ++j)
            for (int i = ri.lo; i <= ri.hi; ++i) {
                const Vec3 p = voxel_center(f, i, j, k);
                if (inside(p)) paint(voxel_index(g.dims, i, j, k));
            }
}

// The same summation order is used by the 2D oracle rasterizer, so a solid whose
// center lies on a lattice plane x = x_i projects bit-identically to its oracle.
bool in_ellipsoid(Vec3 p, Vec3 c, Vec3 a)
{
    const double dx = (p.x - c.x) / a.x, dy = (p.y - c.y) / a.y, dz = (p.z - c.z) / a.z;
    double q = dx * dx;
    q += dy * dy;
    q += dz * dz;
    return q <= 1.0;
}

bool in_sphere(Vec3 p, Vec3 c, double r)
{
    const double dx = p.x - c.x, dy = p.y - c.y, dz = p.z - c.z;
    double q = dx * dx;
    q += dy * dy;
    q += dz * dz;
    return q <= r * r;
}

bool in_box(Vec3 p, const BoxSolid& b)
{
    return std::fabs(p.x - b.center.x) <= b.extent.x / 2 && std::fabs(p.y - b.center.y) <= b.extent.y / 2 &&
           std::fabs(p.z - b.center.z) <= b.extent.z / 2;
}

}  // namespace

Phantom generate(const PhantomSpec& spec, const Grid& g)
{
    const auto bad = validate(spec);
    if (!bad.empty()) {
        std::string msg = "phantom spec violates:";
        for (const auto& b : bad) msg += " [" + b + "]";
        fail(ErrorKind::validation, msg);
    }
    check_frame(g.frame);
    const auto& f = g.frame;
    const double border = 20.0;
    const double need[3] = {spec.head.x + border, spec.head.y + border, spec.head.z + border};
    const double org[3] = {f.origin.x, f.origin.y, f.origin.z};
    const double sp[3] = {f.spacing.x, f.spacing.y, f.spacing.z};
    for (int a = 0; a < 3; ++a) {
        const double lo = org[a], hi = org[a] + (g.dims[a] - 1) * sp[a];
        if (lo > -need[a] + 1e-9 || hi < need[a] - 1e-9)
            fail(ErrorKind::argument, "grid does not enclose the head with a 20 mm air border");
    }

    Phantom ph;
    ph.spec = spec;
    Cohort& c = ph.cohort;
    c.ct.frame = f;
    c.ct.dims = g.dims;
    const std::size_t n = voxel_count(g.dims);
    c.ct.hu.assign(n, static_cast<std::int16_t>(spec.hu_air));

    auto add_mask = [&](const std::string& label) -> StructureMask& {
        StructureMask m;
        m.frame = f;
        m.dims = g.dims;
        m.label = label;
        m.bits.assign(n, 0);
        c.masks.push_back(std::move(m));
        return c.masks.back();
    };
    c.masks.reserve(kStructureLabels.size());
    for (const auto& l : kStructureLabels) add_mask(l);
    auto mask = [&](const std::string& label) -> StructureMask& {
        for (auto& m : c.masks)
            if (m.label == label) return m;
        fail(ErrorKind::internal, "missing mask " + label);
    };
    auto painter = [&](const std::string& label, double hu) {
        StructureMask* m = &mask(label);
        const auto v = static_cast<std::int16_t>(hu);
        return [m, v, &c](std::size_t idx) {
            m->bits[idx] = 1;
            c.ct.hu[idx] = v;
        };
    };

    const Vec3 origin0{0, 0, 0};
    const Vec3 in = interior(spec);
    voxelize(
        g, {-spec.head.x, -spec.head.y, -spec.head.z}, {spec.head.x, spec.head.y, spec.head.z},
        [&](Vec3 p) { return in_ellipsoid(p, origin0, spec.head) && !in_ellipsoid(p, origin0, in); },
        painter("skin", spec.hu_skin));
    const Vec3 bc = spec.brain_center, ba = spec.brain;
    voxelize(
        g, {bc.x - ba.x, bc.y - ba.y, bc.z - ba.z}, {bc.x + ba.x, bc.y + ba.y, bc.z + ba.z},
        [&](Vec3 p) { return in_ellipsoid(p, bc, ba); }, painter("brain", spec.hu_brain));
    for (int side : {1, -1}) {
        const std::string sfx = side > 0 ? "left" : "right";
        const Vec3 e = spec.eye(side), l = spec.lens(side);
        const double r = spec.eye_r, lr = spec.lens_r;
        voxelize(
            g, {e.x - r, e.y - r, e.z - r}, {e.x + r, e.y + r, e.z + r},
            [&](Vec3 p) { return in_sphere(p, e, r) && !in_sphere(p, l, lr); }, painter("eye_" + sfx, spec.hu_eye));
        voxelize(
            g, {l.x - lr, l.y - lr, l.z - lr}, {l.x + lr, l.y + lr, l.z + lr},
            [&](Vec3 p) { return in_sphere(p, l, lr); }, painter("lens_" + sfx, spec.hu_lens));
    }
    for (const BoxSolid* b : {&spec.c1, &spec.c2}) {
        const Vec3 h{b->extent.x / 2, b->extent.y / 2, b->extent.z / 2};
        voxelize(
            g, {b->center.x - h.x, b->center.y - h.y, b->center.z - h.z},
            {b->center.x + h.x, b->center.y + h.y, b->center.z + h.z}, [&](Vec3 p) { return in_box(p, *b); },
            painter(b == &spec.c1 ? "vertebra_c1" : "vertebra_c2", spec.hu_vertebra));
    }
    ph.oracle = make_oracle(spec);
    return ph;
}

PhantomOracle make_oracle(const PhantomSpec& s)
{
    PhantomOracle o;
    auto ellipse = [](const std::string& kind, Vec2 c, Vec2 h) {
        return OracleShape{kind, c, h, {c.u - h.u, c.u + h.u, c.v - h.v, c.v + h.v}};
    };
    // u = -y, v = z
    o.shapes["skin"] = ellipse("ellipse", {0, 0}, {s.head.y, s.head.z});
    o.shapes["brain"] = ellipse("ellipse", {-s.brain_center.y, s.brain_center.z}, {s.brain.y, s.brain.z});
    for (int side : {1, -1}) {
        const std::string sfx = side > 0 ? "left" : "right";
        const Vec3 e = s.eye(side), l = s.lens(side);
        o.shapes["eye_" + sfx] = ellipse("disk", {-e.y, e.z}, {s.eye_r, s.eye_r});
        o.shapes["lens_" + sfx] = ellipse("disk", {-l.y, l.z}, {s.lens_r, s.lens_r});
    }
    o.shapes["vertebra_c1"] = ellipse("rect", {-s.c1.center.y, s.c1.center.z}, {s.c1.extent.y / 2, s.c1.extent.z / 2});
    o.shapes["vertebra_c2"] = ellipse("rect", {-s.c2.center.y, s.c2.center.z}, {s.c2.extent.y / 2, s.c2.extent.z / 2});
    return o;
}

BevSilhouette rasterize_oracle(const OracleShape& sh, const BevFrame& f, const std::string& label)
{
    BevSilhouette out = BevSilhouette::empty(f, label);
    // y = -u keeps the arithmetic identical to the voxel tests
    const double cy = -sh.center.u, cz = sh.center.v;
    for (int r = 0; r < f.rows; ++r)
        for (int c = 0; c < f.cols; ++c) {
            const double y = -f.u(c), z = f.v(r);
            bool in = false;
            if (sh.kind == "ellipse") {
                const double dy = (y - cy) / sh.half.u, dz = (z - cz) / sh.half.v;
                double q = dy * dy;
                q += dz * dz;
                in = q <= 1.0;
            } else if (sh.kind == "disk") {
                const double dy = y - cy, dz = z - cz;
                double q = dy * dy;
                q += dz * dz;
                in = q <= sh.half.u * sh.half.u;
            } else if (sh.kind == "rect") {
                in = std::fabs(y - cy) <= sh.half.u && std::fabs(z - cz) <= sh.half.v;
            } else {
                fail(ErrorKind::format, "unknown oracle shape kind \"" + sh.kind + "\"");
            }
            if (in) out.set(c, r);
        }
    return out;
}

namespace {

json v3(Vec3 v) { return json::array({r9(v.x), r9(v.y), r9(v.z)}); }

Vec3 v3_from(const json& j, const char* what)
{
    if (!j.is_array() || j.size() != 3) fail(ErrorKind::format, std::string("phantom spec: bad \"") + what + "\"");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

json to_json(const PhantomSpec& s)
{
    return json{{"seed", s.seed},
                {"head_semi_axes", v3(s.head)},
                {"shell_thickness", r9(s.shell)},
                {"brain_center", v3(s.brain_center)},
                {"brain_semi_axes", v3(s.brain)},
                {"eye_radius", r9(s.eye_r)},
                {"eye_center_left", v3(s.eye(1))},
                {"lens_radius", r9(s.lens_r)},
                {"lens_anterior_offset", r9(s.lens_offset)},
                {"c1_center", v3(s.c1.center)},
                {"c1_extent", v3(s.c1.extent)},
                {"c2_center", v3(s.c2.center)},
                {"c2_extent", v3(s.c2.extent)},
                {"hu", {{"air", s.hu_air},
                        {"skin", s.hu_skin},
                        {"brain", s.hu_brain},
                        {"eye", s.hu_eye},
                        {"lens", s.hu_lens},
                        {"vertebra", s.hu_vertebra}}}};
}

PhantomSpec spec_from_json(const json& j)
{
    try {
        PhantomSpec s;
        s.seed = j.at("seed").get<std::uint64_t>();
        s.head = v3_from(j.at("head_semi_axes"), "head_semi_axes");
        s.shell = j.at("shell_thickness").get<double>();
        s.brain_center = v3_from(j.at("brain_center"), "brain_center");
        s.brain = v3_from(j.at("brain_semi_axes"), "brain_semi_axes");
        s.eye_r = j.at("eye_radius").get<double>();
        s.eye_center = v3_from(j.at("eye_center_left"), "eye_center_left");
        s.lens_r = j.at("lens_radius").get<double>();
        s.lens_offset = j.at("lens_anterior_offset").get<double>();
        s.c1 = {v3_from(j.at("c1_center"), "c1_center"), v3_from(j.at("c1_extent"), "c1_extent")};
        s.c2 = {v3_from(j.at("c2_center"), "c2_center"), v3_from(j.at("c2_extent"), "c2_extent")};
        const json& hu = j.at("hu");
        s.hu_air = hu.at("air").get<double>();
        s.hu_skin = hu.at("skin").get<double>();
        s.hu_brain = hu.at("brain").get<double>();
        s.hu_eye = hu.at("eye").get<double>();
        s.hu_lens = hu.at("lens").get<double>();
        s.hu_vertebra = hu.at("vertebra").get<double>();
        return s;
    } catch (const json::exception& e) {
        fail(ErrorKind::format, std::string("phantom spec: ") + e.what());
    }
}

json to_json(const PhantomOracle& o)
{
    json out = json::object();
    for (const auto& [label, s] : o.shapes) {
        out[label] = {{"kind", s.kind},
                      {"center", {r9(s.center.u), r9(s.center.v)}},
                      {"half_extent", {r9(s.half.u), r9(s.half.v)}},
                      {"extrema",
                       {{"min_u", r9(s.ext.min_u)},
                        {"max_u", r9(s.ext.max_u)},
                        {"min_v", r9(s.ext.min_v)},
                        {"max_v", r9(s.ext.max_v)}}}};
    }
    return json{{"projection", "parallel"}, {"structures", out}};
}

PhantomOracle oracle_from_json(const json& j)
{
    try {
        PhantomOracle o;
        for (auto it = j.at("structures").begin(); it != j.at("structures").end(); ++it) {
            const json& s = it.value();
            OracleShape sh;
            sh.kind = s.at("kind").get<std::string>();
            sh.center = {s.at("center")[0].get<double>(), s.at("center")[1].get<double>()};
            sh.half = {s.at("half_extent")[0].get<double>(), s.at("half_extent")[1].get<double>()};
            const json& e = s.at("extrema");
            sh.ext = {e.at("min_u").get<double>(), e.at("max_u").get<double>(), e.at("min_v").get<double>(),
                      e.at("max_v").get<double>()};
            o.shapes[it.key()] = sh;
        }
        return o;
    } catch (const json::exception& e) {
        fail(ErrorKind::format, std::string("oracle.json: ") + e.what());
    }
}

}  // namespace wbrt
