#include "wbrt/aperture.hpp"

#include <algorithm>
#include <cmath>

#include "wbrt/errors.hpp"
#include "wbrt/projection.hpp"

namespace wbrt {

AperturePolygon build(const LandmarkSet& l, const BevFrame& frame)
{
    const auto bad = validate(l);
    if (!bad.empty()) fail(ErrorKind::landmark_infeasible, "cannot build aperture: " + bad.front());
    std::vector<Vec2> ring{l.A, l.B, l.C};
    std::vector<std::string> names{"A", "B", "C"};
    const auto& path = l.ce_path.pts;
    for (std::size_t i = 1; i + 1 < path.size(); ++i) {
        ring.push_back(path[i]);
        names.push_back(l.D && path[i] == *l.D ? "D" : "ce");
    }
    for (const auto& [p, n] : {std::pair{l.E, "E"}, {l.F, "F"}, {l.G, "G"}, {l.H, "H"}, {l.I, "I"}}) {
        ring.push_back(p);
        names.push_back(n);
    }

    AperturePolygon out;
    out.config = l.config;
    out.frame = frame;
    out.warnings = l.warnings;
    for (std::size_t k : simplify_ring(ring, 1e-6)) {
        out.boundary.pts.push_back(ring[k]);
        out.names.push_back(names[k]);
    }
    const auto problems = polygon_problems(out.boundary.pts);
    if (!problems.empty()) fail(ErrorKind::aperture_degenerate, "aperture polygon: " + problems.front());
    return out;
}

BevSilhouette rasterize_ring(const std::vector<Vec2>& ring, const BevFrame& f, const std::string& label)
{
    BevSilhouette out = BevSilhouette::empty(f, label);
    const std::size_t n = ring.size();
    std::vector<double> xs;
    for (int r = 0; r < f.rows; ++r) {
        const double v = f.v(r);
        xs.clear();
        for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
            const Vec2 a = ring[j], b = ring[i];
            if ((a.v > v) != (b.v > v)) xs.push_back(a.u + (v - a.v) * (b.u - a.u) / (b.v - a.v));
        }
        std::sort(xs.begin(), xs.end());
        // even-odd interior: [x0, x1), [x2, x3), ...; boundary centers are added below
        for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
            int c = std::max(0, static_cast<int>(std::floor((xs[k] - f.u0) / f.spacing)) - 1);
            while (c < f.cols && f.u(c) < xs[k]) ++c;
            for (; c < f.cols && f.u(c) < xs[k + 1]; ++c) out.set(c, r);
        }
    }
    // closed set: centers lying on an edge count as inside
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2 a = ring[j], b = ring[i];
        const double len = norm(b - a);
        if (len == 0) continue;
        const int c0 = std::max(0, static_cast<int>(std::floor((std::min(a.u, b.u) - f.u0) / f.spacing)));
        const int c1 = std::min(f.cols - 1, static_cast<int>(std::ceil((std::max(a.u, b.u) - f.u0) / f.spacing)));
        const int r0 = std::max(0, static_cast<int>(std::floor((std::min(a.v, b.v) - f.v0) / f.spacing)));
        const int r1 = std::min(f.rows - 1, static_cast<int>(std::ceil((std::max(a.v, b.v) - f.v0) / f.spacing)));
        for (int r = r0; r <= r1; ++r)
            for (int c = c0; c <= c1; ++c)
                if (point_segment_distance({f.u(c), f.v(r)}, a, b) <= 1e-9 * std::max(1.0, len)) out.set(c, r);
    }
    return out;
}

BevSilhouette rasterize(const AperturePolygon& p, const BevFrame& f)
{
    check_frame(f);
    for (const auto& q : p.boundary.pts)
        if (q.u < f.u_lo() || q.u > f.u_hi() || q.v < f.v_lo() || q.v > f.v_hi())
            fail(ErrorKind::argument, "aperture polygon exceeds the BEV frame");
    return rasterize_ring(p.boundary.pts, f, "aperture");
}

double area(const AperturePolygon& p) { return std::fabs(signed_area(p.boundary.pts)); }

json to_json(const AperturePolygon& p)
{
    json verts = json::array();
    for (std::size_t i = 0; i < p.boundary.pts.size(); ++i)
        verts.push_back({{"name", p.names[i]}, {"u", r9(p.boundary.pts[i].u)}, {"v", r9(p.boundary.pts[i].v)}});
    return json{{"tool_version", kToolVersion},
                {"units", "mm"},
                {"frame", to_json(p.frame)},
                {"vertices", verts},
                {"area_mm2", r9(area(p))},
                {"config", to_json(p.config)},
                {"warnings", p.warnings}};
}

AperturePolygon aperture_from_json(const json& j)
{
    AperturePolygon p;
    try {
        p.frame = bev_frame_from_json(j.at("frame"));
        for (const auto& v : j.at("vertices")) {
            p.boundary.pts.push_back({v.at("u").get<double>(), v.at("v").get<double>()});
            p.names.push_back(v.value("name", std::string{}));
        }
        if (j.contains("config")) p.config = aperture_config_from_json(j["config"]);
        if (j.contains("warnings")) p.warnings = j["warnings"].get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        fail(ErrorKind::format, std::string("aperture JSON: ") + e.what());
    }
    const auto problems = polygon_problems(p.boundary.pts);
    if (!problems.empty()) fail(ErrorKind::format, "aperture JSON: " + problems.front());
    return p;
}

std::string to_svg(const AperturePolygon& p)
{
    const auto& f = p.frame;
    const double w = f.u_hi() - f.u_lo(), h = f.v_hi() - f.v_lo();
    char buf[256];
    std::string s;
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 %.3f %.3f\" width=\"%.0f\" height=\"%.0f\">\n", w, h,
                  w * 2, h * 2);
    s += buf;
    s += "<rect width=\"100%\" height=\"100%\" fill=\"black\"/>\n<polygon fill=\"none\" stroke=\"red\" stroke-width=\"0.6\" points=\"";
    for (const auto& q : p.boundary.pts) {
        std::snprintf(buf, sizeof buf, "%.3f,%.3f ", q.u - f.u_lo(), f.v_hi() - q.v);
        s += buf;
    }
    s += "\"/>\n</svg>\n";
    return s;
}

}  // namespace wbrt
