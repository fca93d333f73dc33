#include "wbrt/projection.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "wbrt/errors.hpp"
#include "wbrt/morphology.hpp"
#include "wbrt/pnm.hpp"
#include "wbrt/util.hpp"

namespace wbrt {

const char* provenance_name(Provenance p)
{
    switch (p) {
    case Provenance::approach1: return "approach1";
    case Provenance::approach2_file: return "approach2-file";
    case Provenance::approach2_threshold: return "approach2-threshold";
    case Provenance::approach2_perturbed: return "approach2-perturbed";
    }
    return "unknown";
}

const BevSilhouette* SilhouetteSet::find(const std::string& label) const
{
    const auto it = items.find(label);
    return it == items.end() ? nullptr : &it->second;
}

bool SilhouetteSet::has(const std::string& label) const
{
    const auto* s = find(label);
    return s && s->any();
}

void SilhouetteSet::put(BevSilhouette s)
{
    if (!same_frame(s.frame, frame)) fail(ErrorKind::argument, "silhouette \"" + s.label + "\" is not in the set's frame");
    const std::string label = s.label;
    items[label] = std::move(s);
}

void add_unions(SilhouetteSet& s)
{
    for (const std::string base : {"eye", "lens"}) {
        if (s.find(base)) continue;
        const auto* l = s.find(base + "_left");
        const auto* r = s.find(base + "_right");
        if (l && r)
            s.put(unite(*l, *r, base));
        else if (l || r) {
            BevSilhouette one = l ? *l : *r;
            one.label = base;
            s.put(std::move(one));
        }
    }
}

BevSilhouette project(const StructureMask& m, const BeamGeometry& beam, const BevFrame& f)
{
    check_frame(f);
    check_frame(m.frame);
    if (beam.gantry_deg != 270.0) fail(ErrorKind::argument, "only the 270 degree (right-lateral) gantry angle is supported");
    if (m.bits.size() != voxel_count(m.dims)) fail(ErrorKind::argument, "mask voxel count does not match dims");
    BevSilhouette out = BevSilhouette::empty(f, m.label);
    const auto& o = m.frame.origin;
    const auto& sp = m.frame.spacing;
    const int nx = m.dims[0], ny = m.dims[1], nz = m.dims[2];

    if (beam.mode == ProjectionMode::parallel) {
        std::vector<std::uint8_t> column(static_cast<std::size_t>(ny) * nz, 0);
        for (int k = 0; k < nz; ++k)
            for (int j = 0; j < ny; ++j) {
                const std::uint8_t* row = m.bits.data() + voxel_index(m.dims, 0, j, k);
                column[static_cast<std::size_t>(k) * ny + j] = std::any_of(row, row + nx, [](std::uint8_t b) { return b != 0; });
            }
        const double p = f.spacing;
        const double hu = 0.5 * (p + sp.y), hv = 0.5 * (p + sp.z);
        for (int k = 0; k < nz; ++k)
            for (int j = 0; j < ny; ++j) {
                if (!column[static_cast<std::size_t>(k) * ny + j]) continue;
                // pixels whose square overlaps the voxel footprint with positive area
                const double u = -(o.y + j * sp.y), v = o.z + k * sp.z;
                const int c_lo = std::max(0, static_cast<int>(std::floor((u - hu - f.u0) / p + 1e-9)) + 1);
                const int c_hi = std::min(f.cols - 1, static_cast<int>(std::ceil((u + hu - f.u0) / p - 1e-9)) - 1);
                const int r_lo = std::max(0, static_cast<int>(std::floor((v - hv - f.v0) / p + 1e-9)) + 1);
                const int r_hi = std::min(f.rows - 1, static_cast<int>(std::ceil((v + hv - f.v0) / p - 1e-9)) - 1);
                for (int r = r_lo; r <= r_hi; ++r)
                    for (int c = c_lo; c <= c_hi; ++c) out.set(c, r);
            }
        return out;
    }

    const Vec3 iso = beam.isocenter;
    const double xs = iso.x - beam.sad;
    bool any = false;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                if (!m.bits[voxel_index(m.dims, i, j, k)]) continue;
                const Vec3 p = voxel_center(m.frame, i, j, k);
                if (!(p.x > xs)) continue;
                const double mag = beam.sad / (p.x - xs);
                const double u = -(iso.y + (p.y - iso.y) * mag), v = iso.z + (p.z - iso.z) * mag;
                const long c = std::lround((u - f.u0) / f.spacing), r = std::lround((v - f.v0) / f.spacing);
                if (c < 0 || r < 0 || c >= f.cols || r >= f.rows) continue;
                out.set(static_cast<int>(c), static_cast<int>(r));
                any = true;
            }
    if (!any) return out;
    BevSilhouette closed = close(out, f.spacing);
    closed.label = m.label;
    return closed;
}

SilhouetteSet project_all(const Cohort& cohort, const BeamGeometry& beam, const BevFrame& frame)
{
    SilhouetteSet s;
    s.frame = frame;
    s.provenance = Provenance::approach1;
    for (const auto& m : cohort.masks) s.put(project(m, beam, frame));
    add_unions(s);
    return s;
}

BevFrame default_frame(const StructureMask& skin, double spacing, double border)
{
    if (!(spacing > 0)) fail(ErrorKind::argument, "BEV spacing must be > 0");
    if (!(border >= 30)) fail(ErrorKind::argument, "BEV border must be at least 30 mm");
    int j0 = skin.dims[1], j1 = -1, k0 = skin.dims[2], k1 = -1;
    for (int k = 0; k < skin.dims[2]; ++k)
        for (int j = 0; j < skin.dims[1]; ++j) {
            const std::uint8_t* row = skin.bits.data() + voxel_index(skin.dims, 0, j, k);
            if (std::any_of(row, row + skin.dims[0], [](std::uint8_t b) { return b != 0; })) {
                j0 = std::min(j0, j);
                j1 = std::max(j1, j);
                k0 = std::min(k0, k);
                k1 = std::max(k1, k);
            }
        }
    if (j1 < 0) fail(ErrorKind::missing_structure, "skin mask is empty; cannot size the BEV frame");
    const auto& o = skin.frame.origin;
    const auto& sp = skin.frame.spacing;
    const double u_min = -(o.y + j1 * sp.y), u_max = -(o.y + j0 * sp.y);
    const double v_min = o.z + k0 * sp.z, v_max = o.z + k1 * sp.z;
    const double anchor_u = -o.y, anchor_v = o.z;
    BevFrame f;
    f.spacing = spacing;
    f.u0 = anchor_u + std::floor((u_min - border - anchor_u) / spacing + 1e-9) * spacing;
    f.v0 = anchor_v + std::floor((v_min - border - anchor_v) / spacing + 1e-9) * spacing;
    f.cols = static_cast<int>(std::ceil((u_max + border - f.u0) / spacing - 1e-9)) + 1;
    f.rows = static_cast<int>(std::ceil((v_max + border - f.v0) / spacing - 1e-9)) + 1;
    return f;
}

SilhouetteSet oracle_silhouettes(const PhantomOracle& oracle, const BevFrame& frame)
{
    SilhouetteSet s;
    s.frame = frame;
    s.provenance = Provenance::approach2_perturbed;
    for (const auto& [label, shape] : oracle.shapes) s.put(rasterize_oracle(shape, frame, label));
    add_unions(s);
    return s;
}

json to_json(const BevFrame& f)
{
    return json{{"u0", r9(f.u0)},
                {"v0", r9(f.v0)},
                {"spacing", r9(f.spacing)},
                {"cols", f.cols},
                {"rows", f.rows},
                {"extent", {{"u_min", r9(f.u_lo())}, {"u_max", r9(f.u_hi())}, {"v_min", r9(f.v_lo())}, {"v_max", r9(f.v_hi())}}}};
}

BevFrame bev_frame_from_json(const json& j)
{
    try {
        BevFrame f;
        f.u0 = j.at("u0").get<double>();
        f.v0 = j.at("v0").get<double>();
        f.spacing = j.at("spacing").get<double>();
        f.cols = j.at("cols").get<int>();
        f.rows = j.at("rows").get<int>();
        if (!(f.spacing > 0) || f.cols <= 0 || f.rows <= 0) fail(ErrorKind::format, "frame: invalid spacing or size");
        return f;
    } catch (const json::exception& e) {
        fail(ErrorKind::format, std::string("frame: ") + e.what());
    }
}

void export_bev(const SilhouetteSet& s, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    json labels = json::array();
    for (const auto& [label, sil] : s.items) {
        GrayImage g;
        g.cols = sil.frame.cols;
        g.rows = sil.frame.rows;
        g.maxval = 255;
        g.px.resize(sil.bits.size());
        for (std::size_t i = 0; i < sil.bits.size(); ++i) g.px[i] = sil.bits[i] ? 255 : 0;
        write_file_atomic(dir / (label + ".pgm"), encode_pgm(g));
        labels.push_back(label);
    }
    json meta = {{"format", "wbrt-bev"},
                 {"frame", to_json(s.frame)},
                 {"axes", "u = -y (anterior +), v = +z (superior +); first stored row is the largest v"},
                 {"labels", labels},
                 {"provenance", provenance_name(s.provenance)}};
    write_json(dir / "bev_meta.json", meta);
}

BevFrame read_bev_frame(const std::filesystem::path& dir)
{
    const json meta = read_json(dir / "bev_meta.json");
    if (!meta.contains("frame")) fail(ErrorKind::format, "bev_meta.json: missing \"frame\"");
    return bev_frame_from_json(meta["frame"]);
}

SilhouetteSet ingest_bev_masks(const std::filesystem::path& dir, const BevFrame& frame,
                               const std::vector<std::string>& required)
{
    check_frame(frame);
    const json meta = read_json(dir / "bev_meta.json");
    if (!meta.contains("frame") || !meta.contains("labels") || !meta["labels"].is_array())
        fail(ErrorKind::format, "bev_meta.json: needs \"frame\" and \"labels\"");
    const BevFrame ff = bev_frame_from_json(meta["frame"]);
    const double tol = 1e-6;
    if (std::fabs(ff.u_lo() - frame.u_lo()) > tol || std::fabs(ff.u_hi() - frame.u_hi()) > tol ||
        std::fabs(ff.v_lo() - frame.v_lo()) > tol || std::fabs(ff.v_hi() - frame.v_hi()) > tol)
        fail(ErrorKind::format, "BEV mask extent does not match the pipeline frame");
    const double ratio = frame.spacing / ff.spacing;
    const bool integer_ratio = std::fabs(ratio - std::round(ratio)) < 1e-6 && std::round(ratio) >= 1;
    const bool integer_inverse = std::fabs(1 / ratio - std::round(1 / ratio)) < 1e-6 && std::round(1 / ratio) >= 1;
    if (!integer_ratio && !integer_inverse)
        fail(ErrorKind::format, "BEV mask spacing is not an integer multiple or divisor of the pipeline spacing");

    SilhouetteSet s;
    s.frame = frame;
    s.provenance = Provenance::approach2_file;
    for (const auto& l : meta["labels"]) {
        if (!l.is_string()) fail(ErrorKind::format, "bev_meta.json: labels must be strings");
        const std::string label = l.get<std::string>();
        if (!is_structure_label(label) && label != "eye" && label != "lens")
            fail(ErrorKind::format, "bev_meta.json: unknown label \"" + label + "\"");
        const GrayImage g = decode_pgm(read_file(dir / (label + ".pgm")));
        if (g.cols != ff.cols || g.rows != ff.rows)
            fail(ErrorKind::format, label + ".pgm dimensions do not match bev_meta.json");
        BevSilhouette out = BevSilhouette::empty(frame, label);
        for (int r = 0; r < frame.rows; ++r)
            for (int c = 0; c < frame.cols; ++c) {
                const int cf = std::clamp(static_cast<int>(std::floor((frame.u(c) - ff.u0) / ff.spacing + 0.5)), 0, ff.cols - 1);
                const int rf = std::clamp(static_cast<int>(std::floor((frame.v(r) - ff.v0) / ff.spacing + 0.5)), 0, ff.rows - 1);
                const std::uint16_t px = g.px[static_cast<std::size_t>(rf) * ff.cols + cf];
                if (px != 0 && px != g.maxval) fail(ErrorKind::format, label + ".pgm is not binary");
                if (px) out.set(c, r);
            }
        s.put(std::move(out));
    }
    add_unions(s);
    for (const auto& r : required)
        if (!s.has(r)) fail(ErrorKind::missing_structure, "required BEV mask \"" + r + "\" is missing or empty");
    return s;
}

const char* perturb_kind_name(PerturbKind k)
{
    switch (k) {
    case PerturbKind::dilate: return "dilate";
    case PerturbKind::erode: return "erode";
    case PerturbKind::boundary_jitter: return "boundary-jitter";
    }
    return "unknown";
}

PerturbKind parse_perturb_kind(const std::string& s)
{
    if (s == "dilate") return PerturbKind::dilate;
    if (s == "erode") return PerturbKind::erode;
    if (s == "boundary-jitter" || s == "jitter") return PerturbKind::boundary_jitter;
    fail(ErrorKind::argument, "unknown perturbation kind \"" + s + "\" (dilate|erode|boundary-jitter)");
}

namespace {

BevSilhouette jitter(const BevSilhouette& s, std::uint64_t seed, double mag)
{
    if (mag == 0.0 || !s.any()) return s;
    constexpr double kTwoPi = 6.283185307179586;
    std::mt19937_64 rng(seed);
    struct Wave {
        double w, ku, kv, phase;
    };
    std::vector<Wave> waves;
    double wsum = 0;
    for (int i = 0; i < 6; ++i) {
        const double w = 0.5 + 0.5 * unit_double(rng());
        const double lambda = 20.0 + 60.0 * unit_double(rng());
        const double dir = kTwoPi * unit_double(rng());
        const double phase = kTwoPi * unit_double(rng());
        waves.push_back({w, kTwoPi / lambda * std::cos(dir), kTwoPi / lambda * std::sin(dir), phase});
        wsum += w;
    }
    const auto& f = s.frame;
    const auto d_in = distance_sq(s.bits, f.cols, f.rows);
    std::vector<std::uint8_t> inv(s.bits.size());
    for (std::size_t i = 0; i < inv.size(); ++i) inv[i] = s.bits[i] ? 0 : 1;
    const auto d_out = distance_sq(inv, f.cols, f.rows);
    BevSilhouette out = s;
    for (int r = 0; r < f.rows; ++r)
        for (int c = 0; c < f.cols; ++c) {
            const std::size_t i = f.index(c, r);
            // signed distance to the boundary, which sits half a pixel outside the set centers
            const double sd = s.bits[i] ? -(std::sqrt(d_out[i]) - 0.5) * f.spacing : (std::sqrt(d_in[i]) - 0.5) * f.spacing;
            double disp = 0;
            for (const auto& w : waves) disp += w.w * std::sin(w.ku * f.u(c) + w.kv * f.v(r) + w.phase);
            disp *= mag / wsum;
            out.bits[i] = sd <= disp ? 1 : 0;
        }
    return out;
}

}  // namespace

SilhouetteSet perturb(const SilhouetteSet& s, std::uint64_t seed, double mag, PerturbKind kind,
                      const std::vector<std::string>& labels)
{
    if (!(mag >= 0)) fail(ErrorKind::argument, "perturbation magnitude must be >= 0");
    SilhouetteSet out = s;
    out.provenance = Provenance::approach2_perturbed;
    auto listed = [&](const std::string& l) { return std::find(labels.begin(), labels.end(), l) != labels.end(); };
    // naming a union selects its side labels
    auto chosen = [&](const std::string& l) {
        if (labels.empty() || listed(l)) return true;
        for (const std::string base : {"eye", "lens"})
            if (l.rfind(base + "_", 0) == 0 && listed(base)) return true;
        return false;
    };
    auto has_sides = [&](const std::string& l) { return s.find(l + "_left") || s.find(l + "_right"); };
    bool recompute_unions = false;
    for (auto& [label, sil] : out.items) {
        const bool is_union = (label == "eye" || label == "lens") && has_sides(label);
        if (is_union || !chosen(label) || !sil.any()) continue;
        const std::uint64_t sub = mix_seed(seed, fnv1a(label));
        BevSilhouette p;
        switch (kind) {
        case PerturbKind::dilate: p = dilate(sil, mag); break;
        case PerturbKind::erode: p = erode(sil, mag); break;
        case PerturbKind::boundary_jitter: p = jitter(sil, sub, mag); break;
        }
        if (!p.any())
            fail(ErrorKind::degenerate_perturbation,
                 std::string(perturb_kind_name(kind)) + " by " + std::to_string(mag) + " mm empties \"" + label + "\"");
        p.label = label;
        sil = std::move(p);
        if (label.rfind("eye_", 0) == 0 || label.rfind("lens_", 0) == 0) recompute_unions = true;
    }
    if (recompute_unions) {
        out.items.erase("eye");
        out.items.erase("lens");
        add_unions(out);
    }
    return out;
}

}  // namespace wbrt
