#include "wbrt/drr.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "wbrt/errors.hpp"
#include "wbrt/morphology.hpp"
#include "wbrt/pnm.hpp"

namespace wbrt {

const char* mode_name(ProjectionMode m) { return m == ProjectionMode::parallel ? "parallel" : "divergent"; }

ProjectionMode parse_mode(const std::string& s)
{
    if (s == "parallel") return ProjectionMode::parallel;
    if (s == "divergent") return ProjectionMode::divergent;
    fail(ErrorKind::argument, "unknown projection mode \"" + s + "\" (parallel|divergent)");
}

void check_beam(const BeamGeometry& beam, const CtVolume& vol)
{
    if (beam.gantry_deg != 270.0) fail(ErrorKind::argument, "only the 270 degree (right-lateral) gantry angle is supported");
    if (beam.mode == ProjectionMode::divergent) {
        const double x_lo = vol.frame.origin.x - 0.5 * vol.frame.spacing.x;
        const double x_hi = vol.frame.origin.x + (vol.dims[0] - 0.5) * vol.frame.spacing.x;
        const double half = std::max(std::fabs(x_lo - beam.isocenter.x), std::fabs(x_hi - beam.isocenter.x));
        if (!(beam.sad > half)) fail(ErrorKind::argument, "source-axis distance must exceed the volume half-extent along the beam");
    }
}

std::uint16_t display_value(double path)
{
    const double d = std::round(65535.0 * (1.0 - std::exp(-path)));
    return static_cast<std::uint16_t>(std::clamp(d, 0.0, 65535.0));
}

Vec3 mask_centroid(const StructureMask& m)
{
    double sx = 0, sy = 0, sz = 0;
    std::size_t n = 0;
    for (int k = 0; k < m.dims[2]; ++k)
        for (int j = 0; j < m.dims[1]; ++j)
            for (int i = 0; i < m.dims[0]; ++i)
                if (m.bits[voxel_index(m.dims, i, j, k)]) {
                    sx += i;
                    sy += j;
                    sz += k;
                    ++n;
                }
    if (n == 0) fail(ErrorKind::missing_structure, "cannot take the centroid of empty mask \"" + m.label + "\"");
    const auto& f = m.frame;
    return {f.origin.x + f.spacing.x * sx / n, f.origin.y + f.spacing.y * sy / n, f.origin.z + f.spacing.z * sz / n};
}

namespace {

constexpr double kAir = -1000.0;

struct Volume {
    const CtVolume& ct;
    int nx, ny, nz;

    double at(int i, int j, int k) const
    {
        if (i < 0 || j < 0 || k < 0 || i >= nx || j >= ny || k >= nz) return kAir;
        return ct.hu[voxel_index(ct.dims, i, j, k)];
    }

    // fi, fj, fk in voxel index space
    double trilinear(double fi, double fj, double fk) const
    {
        const double i0f = std::floor(fi), j0f = std::floor(fj), k0f = std::floor(fk);
        const int i0 = static_cast<int>(i0f), j0 = static_cast<int>(j0f), k0 = static_cast<int>(k0f);
        const double ti = fi - i0f, tj = fj - j0f, tk = fk - k0f;
        const double c00 = at(i0, j0, k0) * (1 - ti) + at(i0 + 1, j0, k0) * ti;
        const double c10 = at(i0, j0 + 1, k0) * (1 - ti) + at(i0 + 1, j0 + 1, k0) * ti;
        const double c01 = at(i0, j0, k0 + 1) * (1 - ti) + at(i0 + 1, j0, k0 + 1) * ti;
        const double c11 = at(i0, j0 + 1, k0 + 1) * (1 - ti) + at(i0 + 1, j0 + 1, k0 + 1) * ti;
        const double c0 = c00 * (1 - tj) + c10 * tj;
        const double c1 = c01 * (1 - tj) + c11 * tj;
        return c0 * (1 - tk) + c1 * tk;
    }
};

inline double mu_of(double hu, double mu_water) { return std::max(0.0, mu_water * (1.0 + hu / 1000.0)); }

void check_footprint(const CtVolume& vol, const BevFrame& f)
{
    const auto& o = vol.frame.origin;
    const auto& s = vol.frame.spacing;
    const double u_lo = -(o.y + (vol.dims[1] - 0.5) * s.y), u_hi = -(o.y - 0.5 * s.y);
    const double v_lo = o.z - 0.5 * s.z, v_hi = o.z + (vol.dims[2] - 0.5) * s.z;
    const double border = 100.0;
    if (f.u_lo() < u_lo - border || f.u_hi() > u_hi + border || f.v_lo() < v_lo - border || f.v_hi() > v_hi + border)
        fail(ErrorKind::argument, "BEV frame lies outside the volume footprint");
}

}  // namespace

DrrImage render(const CtVolume& vol, const BeamGeometry& beam, const BevFrame& frame, const DrrOptions& opt)
{
    check_frame(frame);
    check_frame(vol.frame);
    if (vol.hu.size() != voxel_count(vol.dims)) fail(ErrorKind::argument, "CT voxel count does not match dims");
    check_beam(beam, vol);
    check_footprint(vol, frame);
    const auto& o = vol.frame.origin;
    const auto& sp = vol.frame.spacing;
    const double step = opt.step > 0 ? opt.step : 0.5 * std::min({sp.x, sp.y, sp.z});
    const double mu_w = opt.mu_water;

    DrrImage img;
    img.frame = frame;
    img.path.assign(frame.size(), 0.0);
    img.display.assign(frame.size(), 0);
    const Volume V{vol, vol.dims[0], vol.dims[1], vol.dims[2]};

    // one voxel of air margin on each side of the outermost centers
    const Vec3 box_lo{o.x - sp.x, o.y - sp.y, o.z - sp.z};
    const Vec3 box_hi{o.x + vol.dims[0] * sp.x, o.y + vol.dims[1] * sp.y, o.z + vol.dims[2] * sp.z};

    auto pixel_parallel = [&](int c, int r) {
        const double fj = (-frame.u(c) - o.y) / sp.y, fk = (frame.v(r) - o.z) / sp.z;
        if (fj <= -1 || fk <= -1 || fj >= V.ny || fk >= V.nz) return 0.0;
        const double len = box_hi.x - box_lo.x;
        const long n = static_cast<long>(std::ceil(len / step - 1e-9));
        double sum = 0.0;
        for (long s = 0; s < n; ++s) {
            const double x = box_lo.x + (s + 0.5) * step;
            sum += mu_of(V.trilinear((x - o.x) / sp.x, fj, fk), mu_w) * step;
        }
        return sum;
    };

    auto pixel_divergent = [&](int c, int r) {
        const Vec3 src{beam.isocenter.x - beam.sad, beam.isocenter.y, beam.isocenter.z};
        const Vec3 tgt{beam.isocenter.x, -frame.u(c), frame.v(r)};
        Vec3 d{tgt.x - src.x, tgt.y - src.y, tgt.z - src.z};
        const double dl = std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
        d = {d.x / dl, d.y / dl, d.z / dl};
        double t0 = 0.0, t1 = INFINITY;
        const double so[3] = {src.x, src.y, src.z}, dd[3] = {d.x, d.y, d.z};
        const double lo[3] = {box_lo.x, box_lo.y, box_lo.z}, hi[3] = {box_hi.x, box_hi.y, box_hi.z};
        for (int a = 0; a < 3; ++a) {
            if (dd[a] == 0.0) {
                if (so[a] < lo[a] || so[a] > hi[a]) return 0.0;
                continue;
            }
            double ta = (lo[a] - so[a]) / dd[a], tb = (hi[a] - so[a]) / dd[a];
            if (ta > tb) std::swap(ta, tb);
            t0 = std::max(t0, ta);
            t1 = std::min(t1, tb);
        }
        if (!(t1 > t0)) return 0.0;
        // Between crossings of the voxel-center planes the trilinear field is a cubic in t,
        // so Simpson's rule on each piece is exact.
        thread_local std::vector<double> ts;
        ts.clear();
        ts.push_back(t0);
        ts.push_back(t1);
        const double oo[3] = {o.x, o.y, o.z}, ss[3] = {sp.x, sp.y, sp.z};
        const int nn[3] = {V.nx, V.ny, V.nz};
        for (int a = 0; a < 3; ++a) {
            if (dd[a] == 0.0) continue;
            for (int m = -1; m <= nn[a]; ++m) {
                const double t = (oo[a] + m * ss[a] - so[a]) / dd[a];
                if (t > t0 && t < t1) ts.push_back(t);
            }
        }
        std::sort(ts.begin(), ts.end());
        auto f = [&](double t) {
            const double x = src.x + t * d.x, y = src.y + t * d.y, z = src.z + t * d.z;
            return mu_of(V.trilinear((x - o.x) / sp.x, (y - o.y) / sp.y, (z - o.z) / sp.z), mu_w);
        };
        double sum = 0.0;
        double fa = f(ts[0]);
        for (std::size_t i = 1; i < ts.size(); ++i) {
            const double a = ts[i - 1], b = ts[i];
            if (!(b > a)) continue;
            // Simpson panels of up to 2 * step keep the sample spacing <= step
            const int k = std::max(1, static_cast<int>(std::ceil((b - a) / (2 * step) - 1e-9)));
            const double h = (b - a) / k;
            for (int q = 0; q < k; ++q) {
                const double lo = a + q * h, hi = q + 1 == k ? b : lo + h;
                const double fb = f(hi);
                sum += (hi - lo) / 6.0 * (fa + 4.0 * f(0.5 * (lo + hi)) + fb);
                fa = fb;
            }
        }
        return sum;
    };

    std::atomic<int> next_row{0};
    auto worker = [&] {
        for (int r = next_row++; r < frame.rows; r = next_row++)
            for (int c = 0; c < frame.cols; ++c) {
                const double p =
                    beam.mode == ProjectionMode::parallel ? pixel_parallel(c, r) : pixel_divergent(c, r);
                img.path[frame.index(c, r)] = p;
                img.display[frame.index(c, r)] = display_value(p);
            }
    };
    int nthreads = opt.threads > 0 ? opt.threads : static_cast<int>(std::thread::hardware_concurrency());
    nthreads = std::clamp(nthreads, 1, 64);
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return img;
}

BevSilhouette threshold_segment(const DrrImage& img, const std::string& label, PathWindow w)
{
    if (!(w.lo <= w.hi)) fail(ErrorKind::argument, "threshold window is empty");
    BevSilhouette raw = BevSilhouette::empty(img.frame, label);
    for (std::size_t i = 0; i < img.path.size(); ++i) {
        const double p = img.path[i];
        raw.bits[i] = (p > 0.0 && p >= w.lo && p <= w.hi) ? 1 : 0;
    }
    if (!raw.any()) fail(ErrorKind::segmentation_failure, "threshold window selected no pixels for \"" + label + "\"");
    const bool vertebra = label == "vertebra" || label == "vertebra_c1" || label == "vertebra_c2";
    auto parts = largest_components(raw, vertebra ? 2 : 1);
    if (!vertebra) return parts.front();
    std::stable_sort(parts.begin(), parts.end(),
                     [](const BevSilhouette& a, const BevSilhouette& b) { return extrema(a)->max_v > extrema(b)->max_v; });
    if (label == "vertebra") {
        BevSilhouette all = parts.front();
        for (std::size_t i = 1; i < parts.size(); ++i) all = unite(all, parts[i], label);
        all.label = label;
        return all;
    }
    BevSilhouette pick = label == "vertebra_c1" ? parts.front() : parts.back();
    pick.label = label;
    return pick;
}

json drr_meta(const DrrImage& img, const BeamGeometry& beam, const DrrOptions& opt)
{
    const auto& f = img.frame;
    return json{{"frame",
                 {{"u0", r9(f.u0)},
                  {"v0", r9(f.v0)},
                  {"spacing", r9(f.spacing)},
                  {"cols", f.cols},
                  {"rows", f.rows},
                  {"extent", {{"u_min", r9(f.u_lo())}, {"u_max", r9(f.u_hi())}, {"v_min", r9(f.v_lo())}, {"v_max", r9(f.v_hi())}}}}},
                {"axes", "u = -y (anterior +), v = +z (superior +); first stored row is the largest v"},
                {"beam",
                 {{"gantry_deg", beam.gantry_deg},
                  {"mode", mode_name(beam.mode)},
                  {"sad", r9(beam.sad)},
                  {"isocenter", {r9(beam.isocenter.x), r9(beam.isocenter.y), r9(beam.isocenter.z)}}}},
                {"mu_water", r9(opt.mu_water)},
                {"display", "round(65535 * (1 - exp(-path)))"}};
}

std::string encode_drr_pgm(const DrrImage& img)
{
    GrayImage g;
    g.cols = img.frame.cols;
    g.rows = img.frame.rows;
    g.maxval = 65535;
    g.px = img.display;
    return encode_pgm(g);
}

}  // namespace wbrt
