#include "wbrt/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wbrt/errors.hpp"

namespace wbrt {

double norm(Vec2 a) { return std::hypot(a.u, a.v); }

void check_frame(const PatientFrame& f)
{
    if (!(f.spacing.x > 0 && f.spacing.y > 0 && f.spacing.z > 0))
        fail(ErrorKind::argument, "patient frame spacing must be strictly positive");
}

bool same_frame(const PatientFrame& a, const PatientFrame& b)
{
    auto eq = [](double p, double q) { return std::fabs(p - q) <= 1e-9 * std::max(1.0, std::fabs(p)); };
    return eq(a.origin.x, b.origin.x) && eq(a.origin.y, b.origin.y) && eq(a.origin.z, b.origin.z) &&
           eq(a.spacing.x, b.spacing.x) && eq(a.spacing.y, b.spacing.y) && eq(a.spacing.z, b.spacing.z);
}

void check_frame(const BevFrame& f)
{
    if (!(f.spacing > 0)) fail(ErrorKind::argument, "BEV pixel spacing must be > 0");
    if (f.cols <= 0 || f.rows <= 0) fail(ErrorKind::argument, "BEV frame must have positive dimensions");
}

bool same_frame(const BevFrame& a, const BevFrame& b, double tol)
{
    return a.cols == b.cols && a.rows == b.rows && std::fabs(a.u0 - b.u0) <= tol &&
           std::fabs(a.v0 - b.v0) <= tol && std::fabs(a.spacing - b.spacing) <= tol;
}

BevSilhouette BevSilhouette::empty(const BevFrame& f, const std::string& label)
{
    check_frame(f);
    BevSilhouette s;
    s.frame = f;
    s.bits.assign(f.size(), 0);
    s.label = label;
    return s;
}

std::size_t BevSilhouette::count() const
{
    return static_cast<std::size_t>(std::count_if(bits.begin(), bits.end(), [](std::uint8_t b) { return b != 0; }));
}

bool BevSilhouette::any() const
{
    return std::any_of(bits.begin(), bits.end(), [](std::uint8_t b) { return b != 0; });
}

std::optional<Extrema> extrema(const BevSilhouette& s)
{
    int c0 = s.frame.cols, c1 = -1, r0 = s.frame.rows, r1 = -1;
    for (int r = 0; r < s.frame.rows; ++r)
        for (int c = 0; c < s.frame.cols; ++c)
            if (s.at(c, r)) {
                c0 = std::min(c0, c);
                c1 = std::max(c1, c);
                r0 = std::min(r0, r);
                r1 = std::max(r1, r);
            }
    if (c1 < 0) return std::nullopt;
    return Extrema{s.frame.u(c0), s.frame.u(c1), s.frame.v(r0), s.frame.v(r1)};
}

BevSilhouette unite(const BevSilhouette& a, const BevSilhouette& b, const std::string& label)
{
    if (!same_frame(a.frame, b.frame)) fail(ErrorKind::argument, "union of silhouettes in different frames");
    BevSilhouette out = a;
    out.label = label;
    for (std::size_t i = 0; i < out.bits.size(); ++i) out.bits[i] = (a.bits[i] | b.bits[i]) ? 1 : 0;
    return out;
}

double signed_area(const std::vector<Vec2>& ring)
{
    double s = 0.0;
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) s += cross(ring[i], ring[(i + 1) % n]);
    return 0.5 * s;
}

double ring_length(const std::vector<Vec2>& ring)
{
    double s = 0.0;
    for (std::size_t i = 0; i < ring.size(); ++i) s += norm(ring[(i + 1) % ring.size()] - ring[i]);
    return s;
}

double polyline_length(const std::vector<Vec2>& pts)
{
    double s = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) s += norm(pts[i] - pts[i - 1]);
    return s;
}

bool point_in_polygon(Vec2 p, const std::vector<Vec2>& ring)
{
    bool inside = false;
    const std::size_t n = ring.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2 a = ring[j], b = ring[i];
        if ((a.v > p.v) != (b.v > p.v)) {
            const double x = a.u + (p.v - a.v) * (b.u - a.u) / (b.v - a.v);
            if (p.u < x) inside = !inside;
        }
    }
    return inside;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b)
{
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 == 0.0) return norm(p - a);
    double t = dot(p - a, ab) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return norm(p - (a + t * ab));
}

namespace {

int orient(Vec2 a, Vec2 b, Vec2 c)
{
    const double x = cross(b - a, c - a);
    return (x > 0) - (x < 0);
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p)
{
    return std::min(a.u, b.u) <= p.u && p.u <= std::max(a.u, b.u) && std::min(a.v, b.v) <= p.v &&
           p.v <= std::max(a.v, b.v);
}

}  // namespace

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d)
{
    const int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(a, b, c)) return true;
    if (o2 == 0 && on_segment(a, b, d)) return true;
    if (o3 == 0 && on_segment(c, d, a)) return true;
    if (o4 == 0 && on_segment(c, d, b)) return true;
    return false;
}

double segment_segment_distance(Vec2 a, Vec2 b, Vec2 c, Vec2 d)
{
    if (segments_intersect(a, b, c, d)) return 0.0;
    return std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d),
                     point_segment_distance(c, a, b), point_segment_distance(d, a, b)});
}

double point_ring_distance(Vec2 p, const std::vector<Vec2>& ring)
{
    double best = INFINITY;
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) best = std::min(best, point_segment_distance(p, ring[i], ring[(i + 1) % n]));
    return best;
}

std::vector<std::string> polygon_problems(const std::vector<Vec2>& ring)
{
    std::vector<std::string> out;
    const std::size_t n = ring.size();
    if (n < 3) {
        out.push_back("polygon needs at least 3 vertices");
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(ring[i].u) || !std::isfinite(ring[i].v)) {
            out.push_back("non-finite vertex " + std::to_string(i));
            return out;
        }
        if (ring[i] == ring[(i + 1) % n]) out.push_back("consecutive duplicate vertex at " + std::to_string(i));
    }
    if (!(std::fabs(signed_area(ring)) > 1e-12)) out.push_back("polygon area is not positive");
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = ring[i], b = ring[(i + 1) % n];
        for (std::size_t j = i + 1; j < n; ++j) {
            const Vec2 c = ring[j], d = ring[(j + 1) % n];
            const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
            if (adjacent) {
                // shared vertex; only a fold-back along the same line is a problem
                const Vec2 shared = (j == i + 1) ? b : a;
                const Vec2 p = (j == i + 1) ? a : b;
                const Vec2 q = (j == i + 1) ? d : c;
                if (cross(p - shared, q - shared) == 0.0 && dot(p - shared, q - shared) > 0.0) {
                    std::ostringstream os;
                    os << "edges " << i << " and " << j << " fold back on each other";
                    out.push_back(os.str());
                }
                continue;
            }
            if (segments_intersect(a, b, c, d)) {
                std::ostringstream os;
                os << "edges " << i << " and " << j << " intersect";
                out.push_back(os.str());
            }
        }
    }
    return out;
}

Polygon2D make_polygon(std::vector<Vec2> ring)
{
    const auto problems = polygon_problems(ring);
    if (!problems.empty()) fail(ErrorKind::argument, "invalid polygon: " + problems.front());
    return Polygon2D{std::move(ring)};
}

std::vector<std::size_t> simplify_ring(const std::vector<Vec2>& ring, double tol)
{
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < ring.size(); ++i)
        if (idx.empty() || !(ring[i] == ring[idx.back()])) idx.push_back(i);
    while (idx.size() > 1 && ring[idx.front()] == ring[idx.back()]) idx.pop_back();

    bool changed = true;
    while (changed && idx.size() > 3) {
        changed = false;
        for (std::size_t k = 0; k < idx.size() && idx.size() > 3; ++k) {
            const Vec2 p = ring[idx[(k + idx.size() - 1) % idx.size()]];
            const Vec2 c = ring[idx[k]];
            const Vec2 n = ring[idx[(k + 1) % idx.size()]];
            if (std::fabs(cross(c - p, n - c)) <= tol && dot(c - p, n - c) > 0.0) {
                idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(k));
                changed = true;
                --k;
            }
        }
    }
    return idx;
}

std::vector<Vec2> densify(const std::vector<Vec2>& pts, double max_step, bool closed)
{
    if (!(max_step > 0)) fail(ErrorKind::argument, "densify step must be > 0");
    std::vector<Vec2> out;
    const std::size_t n = pts.size();
    if (n == 0) return out;
    const std::size_t segs = closed ? n : n - 1;
    for (std::size_t i = 0; i < segs; ++i) {
        const Vec2 a = pts[i], b = pts[(i + 1) % n];
        const double len = norm(b - a);
        const int k = std::max(1, static_cast<int>(std::ceil(len / max_step - 1e-12)));
        for (int j = 0; j < k; ++j) out.push_back(a + (static_cast<double>(j) / k) * (b - a));
    }
    if (!closed) out.push_back(pts.back());
    return out;
}

}  // namespace wbrt
