#include "wbrt/landmarks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wbrt/contour.hpp"
#include "wbrt/errors.hpp"
#include "wbrt/morphology.hpp"

namespace wbrt {

namespace {

bool in_margin_set(double x) { return x == 10.0 || x == 15.0 || x == 20.0; }

const char* ab_name(AbShape a) { return a == AbShape::horizontal ? "horizontal" : "diagonal"; }
const char* cdde_name(CdDe c) { return c == CdDe::contour ? "contour" : "straight"; }
const char* vert_name(CaudalVertebra c) { return c == CaudalVertebra::C1 ? "C1" : "C2"; }

const char* bc_name(BcPosition b)
{
    switch (b) {
    case BcPosition::lens: return "lens";
    case BcPosition::moderate: return "moderate";
    case BcPosition::eye: return "eye";
    }
    return "unknown";
}

}  // namespace

void check_config(const ApertureConfig& cfg)
{
    if (!in_margin_set(cfg.brain_margin)) fail(ErrorKind::argument, "brain_margin must be 10, 15 or 20 mm");
    if (!in_margin_set(cfg.skin_flash)) fail(ErrorKind::argument, "skin_flash must be 10, 15 or 20 mm");
    for (double x : {cfg.ab_drop, cfg.vertebra_anterior_margin, cfg.orbit_superior_margin})
        if (!(x >= 0) || !std::isfinite(x)) fail(ErrorKind::argument, "aperture margins must be finite and >= 0");
}

json to_json(const ApertureConfig& c)
{
    return json{{"ab_shape", ab_name(c.ab_shape)},
                {"ab_drop", r9(c.ab_drop)},
                {"bc_position", bc_name(c.bc_position)},
                {"cd_de", cdde_name(c.cd_de)},
                {"brain_margin", r9(c.brain_margin)},
                {"skin_flash", r9(c.skin_flash)},
                {"caudal_vertebra", vert_name(c.caudal_vertebra)},
                {"include_orbitals", c.include_orbitals},
                {"vertebra_anterior_margin", r9(c.vertebra_anterior_margin)},
                {"orbit_superior_margin", r9(c.orbit_superior_margin)}};
}

ApertureConfig aperture_config_from_json(const json& j)
{
    if (!j.is_object()) fail(ErrorKind::format, "aperture config must be a JSON object");
    ApertureConfig c;
    auto str = [&](const std::string& key) {
        if (!j.at(key).is_string()) fail(ErrorKind::format, "aperture." + key + " must be a string");
        return j.at(key).get<std::string>();
    };
    auto num = [&](const std::string& key) {
        if (!j.at(key).is_number()) fail(ErrorKind::format, "aperture." + key + " must be a number");
        return j.at(key).get<double>();
    };
    auto bad = [](const std::string& key, const std::string& v) {
        fail(ErrorKind::format, "aperture." + key + ": invalid value \"" + v + "\"");
    };
    for (const auto& [key, val] : j.items()) {
        if (key == "ab_shape") {
            const auto v = str(key);
            if (v == "horizontal") c.ab_shape = AbShape::horizontal;
            else if (v == "diagonal") c.ab_shape = AbShape::diagonal;
            else bad(key, v);
        } else if (key == "ab_drop") {
            c.ab_drop = num(key);
        } else if (key == "bc_position") {
            const auto v = str(key);
            if (v == "lens") c.bc_position = BcPosition::lens;
            else if (v == "moderate") c.bc_position = BcPosition::moderate;
            else if (v == "eye") c.bc_position = BcPosition::eye;
            else bad(key, v);
        } else if (key == "cd_de") {
            const auto v = str(key);
            if (v == "contour") c.cd_de = CdDe::contour;
            else if (v == "straight") c.cd_de = CdDe::straight;
            else bad(key, v);
        } else if (key == "brain_margin") {
            c.brain_margin = num(key);
        } else if (key == "skin_flash") {
            c.skin_flash = num(key);
        } else if (key == "caudal_vertebra") {
            const auto v = str(key);
            if (v == "C1") c.caudal_vertebra = CaudalVertebra::C1;
            else if (v == "C2") c.caudal_vertebra = CaudalVertebra::C2;
            else bad(key, v);
        } else if (key == "include_orbitals") {
            if (!val.is_boolean()) fail(ErrorKind::format, "aperture.include_orbitals must be a boolean");
            c.include_orbitals = val.get<bool>();
        } else if (key == "vertebra_anterior_margin") {
            c.vertebra_anterior_margin = num(key);
        } else if (key == "orbit_superior_margin") {
            c.orbit_superior_margin = num(key);
        } else {
            fail(ErrorKind::format, "aperture: unknown key \"" + key + "\"");
        }
    }
    try {
        check_config(c);
    } catch (const Error& e) {
        fail(ErrorKind::format, e.what());
    }
    return c;
}

std::string vertebra_label(const ApertureConfig& cfg)
{
    return cfg.caudal_vertebra == CaudalVertebra::C1 ? "vertebra_c1" : "vertebra_c2";
}

std::vector<std::string> required_labels(const ApertureConfig& cfg)
{
    std::vector<std::string> r{"brain", "skin", vertebra_label(cfg)};
    if (!cfg.include_orbitals) {
        r.push_back("eye");
        r.push_back("lens");
    }
    return r;
}

namespace {

struct Hit {
    double v;
    double pos;  // segment index + fraction along the segment
};

// Lowest crossing of a closed ring with the vertical line u = x.
std::optional<Hit> lowest_crossing(const std::vector<Vec2>& ring, double x)
{
    std::optional<Hit> best;
    const std::size_t n = ring.size();
    auto offer = [&](double v, double pos) {
        if (!best || v < best->v) best = Hit{v, pos};
    };
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 p = ring[i], q = ring[(i + 1) % n];
        const double dp = p.u - x, dq = q.u - x;
        if (dp == 0 && dq == 0) {
            offer(p.v, static_cast<double>(i));
            offer(q.v, static_cast<double>(i) + 1 - 1e-12);
        } else if ((dp <= 0 && dq >= 0) || (dp >= 0 && dq <= 0)) {
            const double t = dp / (dp - dq);
            offer(p.v + t * (q.v - p.v), static_cast<double>(i) + t);
        }
    }
    return best;
}

Vec2 at_pos(const std::vector<Vec2>& ring, double pos)
{
    const std::size_t n = ring.size();
    const auto i = static_cast<std::size_t>(std::floor(pos)) % n;
    const double t = pos - std::floor(pos);
    const Vec2 p = ring[i], q = ring[(i + 1) % n];
    return p + t * (q - p);
}

void push_distinct(std::vector<Vec2>& pts, Vec2 p)
{
    if (pts.empty() || !(pts.back() == p)) pts.push_back(p);
}

// Boundary arc between two ring positions: the one running lower (smaller max v).
std::vector<Vec2> lower_arc(const std::vector<Vec2>& ring, double pa, double pb, Vec2 a, Vec2 b)
{
    const double n = static_cast<double>(ring.size());
    auto fwd = [&](double p) {
        double d = std::fmod(p - pa, n);
        return d < 0 ? d + n : d;
    };
    const double fb = fwd(pb);
    std::vector<std::pair<double, std::size_t>> ahead, behind;
    for (std::size_t k = 0; k < ring.size(); ++k) {
        const double f = fwd(static_cast<double>(k));
        if (f > 0 && f < fb) ahead.push_back({f, k});
        else if (f > fb) behind.push_back({f, k});
    }
    std::sort(ahead.begin(), ahead.end());
    std::sort(behind.begin(), behind.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
    auto build = [&](const std::vector<std::pair<double, std::size_t>>& mid) {
        std::vector<Vec2> pts{a};
        for (const auto& m : mid) push_distinct(pts, ring[m.second]);
        push_distinct(pts, b);
        return pts;
    };
    auto top = [](const std::vector<Vec2>& pts) {
        double m = -std::numeric_limits<double>::infinity();
        for (const auto& p : pts) m = std::max(m, p.v);
        return m;
    };
    auto one = build(ahead), two = build(behind);
    if (top(two) < top(one) || (top(two) == top(one) && polyline_length(two) < polyline_length(one)))
        return two;
    return one;
}

const std::vector<Vec2>& main_ring(const std::vector<Polyline2D>& contours)
{
    const Polyline2D* best = nullptr;
    double best_area = 0;
    for (const auto& c : contours) {
        const double a = signed_area(c.pts);
        if (a > best_area) {
            best_area = a;
            best = &c;
        }
    }
    if (!best) fail(ErrorKind::landmark_infeasible, "expanded brain has no outer boundary");
    return best->pts;
}

const BevSilhouette& need(const SilhouetteSet& s, const std::string& label)
{
    const auto* p = s.find(label);
    if (!p || !p->any()) fail(ErrorKind::missing_structure, "required silhouette \"" + label + "\" is missing or empty");
    return *p;
}

std::string fmt(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", x);
    return buf;
}

}  // namespace

LandmarkSet compute_landmarks(const SilhouetteSet& s, const ApertureConfig& cfg)
{
    check_config(cfg);
    const BevSilhouette& brain = need(s, "brain");
    const BevSilhouette& skin = need(s, "skin");
    const BevSilhouette& vert = need(s, vertebra_label(cfg));
    const bool need_eye = !cfg.include_orbitals;
    const BevSilhouette* eye = s.has("eye") ? s.find("eye") : nullptr;
    const BevSilhouette* lens = s.has("lens") ? s.find("lens") : nullptr;
    if (need_eye && !eye) need(s, "eye");
    if (need_eye && !lens) need(s, "lens");

    LandmarkSet l;
    l.config = cfg;
    l.include_orbitals = cfg.include_orbitals;
    const Extrema sk = *extrema(skin);
    const Extrema vx = *extrema(vert);
    l.u_ant_border = sk.max_u + cfg.skin_flash;
    l.u_post_border = sk.min_u - cfg.skin_flash;
    l.v_sup_border = sk.max_v + cfg.skin_flash;
    l.v_caudal = vx.min_v;
    const double u_vert = vx.max_u + cfg.vertebra_anterior_margin;

    const BevSilhouette bplus = dilate(brain, cfg.brain_margin);
    const Extrema bx = *extrema(bplus);
    if (bx.max_v > l.v_sup_border)
        l.warnings.push_back("expanded brain reaches " + fmt(bx.max_v) + " mm, above the cranial border " + fmt(l.v_sup_border) +
                             " mm");
    const auto contours = extract_contour(bplus);
    const std::vector<Vec2>& ring = main_ring(contours);

    // E on the expanded-brain boundary at the vertebra line
    double pos_e;
    const auto hit_e = lowest_crossing(ring, u_vert);
    if (hit_e) {
        l.E = {u_vert, hit_e->v};
        pos_e = hit_e->pos;
    } else {
        std::size_t low = 0;
        for (std::size_t k = 1; k < ring.size(); ++k)
            if (ring[k].v < ring[low].v) low = k;
        l.E = {u_vert, ring[low].v};
        pos_e = static_cast<double>(low);
        l.warnings.push_back("line u = " + fmt(u_vert) + " misses the expanded brain; E uses its lowest point");
    }
    l.F = {u_vert, l.v_caudal};
    l.G = {l.u_post_border, l.v_caudal};
    l.H = {l.u_post_border, l.v_sup_border};
    l.I = {l.u_ant_border, l.v_sup_border};
    const double drop = cfg.ab_shape == AbShape::diagonal ? cfg.ab_drop : 0.0;

    if (cfg.include_orbitals) {
        l.u_bc = l.u_ant_border;
        if (eye) {
            const Extrema ex = *extrema(*eye);
            const double v_b = ex.max_v + cfg.orbit_superior_margin;
            l.A = {l.u_ant_border, v_b + drop};
            l.C = {l.u_ant_border, ex.min_v - cfg.orbit_superior_margin};
        } else {
            l.C = {l.u_ant_border, l.E.v};
            l.A = {l.u_ant_border, 0.5 * (l.C.v + l.v_sup_border)};
            l.warnings.push_back("no eye silhouette; anterior border runs straight from the cranial to the caudal corner");
        }
        l.B = l.A;
        l.ce_path.pts = {l.C, l.E};
    } else {
        const Extrema ex = *extrema(*eye);
        const Extrema lx = *extrema(*lens);
        switch (cfg.bc_position) {
        case BcPosition::lens: l.u_bc = lx.min_u; break;
        case BcPosition::eye: l.u_bc = ex.min_u; break;
        case BcPosition::moderate: l.u_bc = 0.5 * (lx.min_u + ex.min_u); break;
        }
        const double v_b = ex.max_v + cfg.orbit_superior_margin;
        l.B = {l.u_bc, v_b};
        l.A = {l.u_ant_border, v_b + drop};
        const auto hit_c = lowest_crossing(ring, l.u_bc);
        if (!hit_c)
            fail(ErrorKind::landmark_infeasible, "line u = " + fmt(l.u_bc) + " (BC) misses the expanded brain");
        l.C = {l.u_bc, hit_c->v};
        if (cfg.cd_de == CdDe::straight) {
            l.ce_path.pts = {l.C, l.E};
        } else {
            auto arc = lower_arc(ring, hit_c->pos, pos_e, l.C, hit_e ? l.E : at_pos(ring, pos_e));
            push_distinct(arc, l.E);
            arc = densify(arc, 1.0, false);
            // lower monotone envelope: a bumpy arc (perturbed masks) keeps v non-increasing
            // without cutting into B+; only a dip below E forces a cut
            double run = arc.front().v;
            bool clamped = false;
            for (auto& p : arc) {
                run = std::min(run, p.v);
                if (run < l.E.v) {
                    clamped = true;
                    p.v = l.E.v;
                } else {
                    p.v = run;
                }
            }
            if (clamped)
                l.warnings.push_back("expanded brain dips below E (v = " + fmt(l.E.v) +
                                     " mm) between C and E; the C -> E path is held at E.v there");
            l.ce_path.pts.clear();
            for (const Vec2& p : arc) push_distinct(l.ce_path.pts, p);
            std::size_t far = 0;
            double far_d = -1;
            for (std::size_t k = 0; k < l.ce_path.pts.size(); ++k) {
                const double d = point_segment_distance(l.ce_path.pts[k], l.C, l.E);
                if (d > far_d) {
                    far_d = d;
                    far = k;
                }
            }
            l.D = l.ce_path.pts[far];
        }
    }

    const auto bad = validate(l);
    if (!bad.empty()) {
        std::string msg = "landmark ordering violated: " + bad.front();
        for (std::size_t i = 1; i < bad.size(); ++i) msg += "; " + bad[i];
        fail(ErrorKind::landmark_infeasible, msg);
    }
    return l;
}

std::vector<std::string> validate(const LandmarkSet& l)
{
    std::vector<std::string> bad;
    auto req = [&](bool ok, const std::string& what) {
        if (!ok) bad.push_back(what);
    };
    // v ordering
    req(l.H.v == l.v_sup_border && l.I.v == l.v_sup_border, "H.v = I.v = v_sup_border");
    req(l.v_sup_border > l.A.v, "v_sup_border > A.v");
    req(l.A.v >= l.B.v, "A.v >= B.v");
    req(l.B.v > l.C.v, "B.v > C.v");
    req(l.C.v >= l.E.v, "C.v >= E.v");
    req(l.E.v >= l.F.v, "E.v >= F.v");
    req(l.F.v == l.v_caudal && l.G.v == l.v_caudal, "F.v = G.v = v_caudal");
    // u ordering
    req(l.H.u == l.u_post_border && l.G.u == l.u_post_border, "H.u = G.u = u_post_border");
    req(l.G.u < l.F.u, "G.u < F.u");
    req(l.F.u == l.E.u, "F.u = E.u");
    req(l.E.u <= l.u_bc, "E.u <= u_bc");
    req(l.B.u == l.u_bc && l.C.u == l.u_bc, "B.u = C.u = u_bc");
    if (l.include_orbitals)
        req(l.u_bc <= l.A.u, "u_bc <= A.u");
    else
        req(l.u_bc < l.A.u, "u_bc < A.u");
    req(l.A.u == l.u_ant_border && l.I.u == l.u_ant_border, "A.u = I.u = u_ant_border");
    // C -> E path
    const auto& p = l.ce_path.pts;
    if (p.size() < 2 || !(p.front() == l.C) || !(p.back() == l.E)) {
        bad.push_back("ce_path runs from C to E");
    } else {
        for (std::size_t i = 1; i < p.size(); ++i)
            if (p[i].v > p[i - 1].v + 1e-9) {
                bad.push_back("ce_path monotone non-increasing in v");
                break;
            }
    }
    return bad;
}

json to_json(const LandmarkSet& l)
{
    auto pt = [](Vec2 p) { return json::array({r9(p.u), r9(p.v)}); };
    json points = {{"A", pt(l.A)}, {"B", pt(l.B)}, {"C", pt(l.C)}, {"E", pt(l.E)},
                   {"F", pt(l.F)}, {"G", pt(l.G)}, {"H", pt(l.H)}, {"I", pt(l.I)}};
    if (l.D) points["D"] = pt(*l.D);
    json path = json::array();
    for (const auto& p : l.ce_path.pts) path.push_back(pt(p));
    return json{{"tool_version", kToolVersion},
                {"units", "mm"},
                {"points", points},
                {"ce_path", path},
                {"derived",
                 {{"u_ant_border", r9(l.u_ant_border)},
                  {"u_post_border", r9(l.u_post_border)},
                  {"v_sup_border", r9(l.v_sup_border)},
                  {"v_caudal", r9(l.v_caudal)},
                  {"u_bc", r9(l.u_bc)}}},
                {"config", to_json(l.config)},
                {"warnings", l.warnings}};
}

}  // namespace wbrt
