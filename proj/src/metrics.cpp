#include "wbrt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wbrt/contour.hpp"
#include "wbrt/errors.hpp"

namespace wbrt {

namespace {

// Neumaier compensated sum.
struct Sum {
    double s = 0, c = 0;
    void add(double x)
    {
        const double t = s + x;
        c += std::fabs(s) >= std::fabs(x) ? (s - t) + x : (x - t) + s;
        s = t;
    }
    double value() const { return s + c; }
};

struct Directed {
    double max = 0;
    double mean = 0;
};

Directed directed(const std::vector<Vec2>& from, const std::vector<Vec2>& to, double spacing)
{
    const std::size_t n = from.size(), m = to.size();
    auto dist = [&](Vec2 p) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m; ++i) best = std::min(best, point_segment_distance(p, to[i], to[(i + 1) % m]));
        return best;
    };
    Directed d;
    Sum integral, length;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = from[i], b = from[(i + 1) % n];
        const double len = norm(b - a);
        const int k = std::max(1, static_cast<int>(std::ceil(len / spacing - 1e-12)));
        double prev = dist(a);
        d.max = std::max(d.max, prev);
        for (int j = 1; j <= k; ++j) {
            const double cur = dist(j == k ? b : a + (static_cast<double>(j) / k) * (b - a));
            d.max = std::max(d.max, cur);
            integral.add(0.5 * (prev + cur) * (len / k));
            prev = cur;
        }
        length.add(len);
    }
    d.mean = integral.value() / length.value();
    return d;
}

}  // namespace

DistanceReport surface_distances(const Polygon2D& a, const Polygon2D& b, double spacing)
{
    if (!(spacing > 0)) fail(ErrorKind::argument, "sampling spacing must be > 0");
    for (const auto* p : {&a, &b}) {
        const auto problems = polygon_problems(p->pts);
        if (!problems.empty()) fail(ErrorKind::argument, "surface distance on invalid polygon: " + problems.front());
    }
    if (a.pts == b.pts) {
        DistanceReport zero;
        zero.spacing = spacing;
        return zero;
    }
    const Directed ab = directed(a.pts, b.pts, spacing);
    const Directed ba = directed(b.pts, a.pts, spacing);
    DistanceReport r;
    r.spacing = spacing;
    r.max_ab = ab.max;
    r.max_ba = ba.max;
    r.mean_ab = ab.mean;
    r.mean_ba = ba.mean;
    r.hausdorff = std::max(ab.max, ba.max);
    r.mean_surface = 0.5 * (ab.mean + ba.mean);
    return r;
}

double lens_margin(const AperturePolygon& aperture, const BevSilhouette& lens)
{
    const auto& ring = aperture.boundary.pts;
    const BevSilhouette in = rasterize_ring(ring, lens.frame, "aperture");
    double depth = -1;
    for (int r = 0; r < lens.frame.rows; ++r)
        for (int c = 0; c < lens.frame.cols; ++c)
            if (lens.at(c, r) && in.at(c, r))
                depth = std::max(depth, point_ring_distance({lens.frame.u(c), lens.frame.v(r)}, ring));
    if (depth >= 0) return -depth;
    double best = std::numeric_limits<double>::infinity();
    const std::size_t m = ring.size();
    for (const auto& contour : extract_contour(lens)) {
        const auto& p = contour.pts;
        for (std::size_t i = 0; i < p.size(); ++i)
            for (std::size_t j = 0; j < m; ++j)
                best = std::min(best, segment_segment_distance(p[i], p[(i + 1) % p.size()], ring[j], ring[(j + 1) % m]));
    }
    return best;
}

ProxyReport proxies(const AperturePolygon& aperture, const SilhouetteSet& s)
{
    const auto* brain = s.find("brain");
    if (!brain || !brain->any()) fail(ErrorKind::missing_structure, "brain silhouette required for coverage");
    ProxyReport r;
    const BevSilhouette in = rasterize_ring(aperture.boundary.pts, brain->frame, "aperture");
    std::size_t total = 0, covered = 0;
    for (std::size_t i = 0; i < brain->bits.size(); ++i)
        if (brain->bits[i]) {
            ++total;
            covered += in.bits[i] ? 1 : 0;
        }
    r.brain_coverage = static_cast<double>(covered) / static_cast<double>(total);

    std::vector<std::string> labels;
    if (s.has("lens_left") || s.has("lens_right"))
        labels = {"lens_left", "lens_right"};
    else
        labels = {"lens"};
    for (const auto& label : labels) {
        LensProxy lp;
        lp.label = label;
        if (s.has(label)) {
            lp.applicable = true;
            lp.margin = lens_margin(aperture, *s.find(label));
            lp.clear = lp.margin > 0;
        }
        r.lenses.push_back(lp);
    }
    return r;
}

QaReport qa_compare(const AperturePolygon& a1, const AperturePolygon& a2, double threshold)
{
    if (!(threshold >= 0) || !std::isfinite(threshold)) fail(ErrorKind::argument, "QA threshold must be finite and >= 0");
    if (!same_frame(a1.frame, a2.frame, 1e-6)) fail(ErrorKind::argument, "apertures are not in the same BEV frame");
    QaReport q;
    q.threshold = threshold;
    q.distances = surface_distances(a1.boundary, a2.boundary);
    q.pass = q.distances.hausdorff <= threshold;
    return q;
}

json to_json(const DistanceReport& d)
{
    return json{{"hausdorff", r9(d.hausdorff)},
                {"mean_surface", r9(d.mean_surface)},
                {"directed",
                 {{"max_1_to_2", r9(d.max_ab)},
                  {"max_2_to_1", r9(d.max_ba)},
                  {"mean_1_to_2", r9(d.mean_ab)},
                  {"mean_2_to_1", r9(d.mean_ba)}}},
                {"sampling_spacing", r9(d.spacing)}};
}

json to_json(const ProxyReport& p)
{
    json lenses = json::array();
    for (const auto& l : p.lenses) {
        json e = {{"label", l.label}, {"applicable", l.applicable}};
        if (l.applicable) {
            e["lens_clear"] = l.clear;
            e["lens_margin"] = r9(l.margin);
        }
        lenses.push_back(e);
    }
    return json{{"brain_coverage", r9(p.brain_coverage)}, {"lenses", lenses}};
}

json to_json(const QaReport& q)
{
    json j = {{"tool_version", kToolVersion},
              {"units", "mm"},
              {"verdict", q.pass ? "pass" : "fail"},
              {"threshold", r9(q.threshold)},
              {"rule", "pass iff hausdorff <= threshold"},
              {"distances", to_json(q.distances)},
              {"provenance", {{"approach_1", q.provenance_1}, {"approach_2", q.provenance_2}}}};
    json prox = json::object();
    if (q.proxies_1) prox["approach_1"] = to_json(*q.proxies_1);
    if (q.proxies_2) prox["approach_2"] = to_json(*q.proxies_2);
    j["proxies"] = prox;
    json inputs = json::object();
    for (const auto& [name, digest] : q.inputs) inputs[name] = "sha256:" + digest;
    j["inputs"] = inputs;
    j["warnings"] = q.warnings;
    return j;
}

}  // namespace wbrt
