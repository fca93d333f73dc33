#include "wbrt/volume.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "wbrt/errors.hpp"
#include "wbrt/util.hpp"

namespace wbrt {

bool is_structure_label(const std::string& label)
{
    return std::find(kStructureLabels.begin(), kStructureLabels.end(), label) != kStructureLabels.end();
}

const StructureMask* Cohort::find(const std::string& label) const
{
    for (const auto& m : masks)
        if (m.label == label) return &m;
    return nullptr;
}

void check_cohort(const Cohort& c)
{
    check_frame(c.ct.frame);
    for (int d : c.ct.dims)
        if (d <= 0) fail(ErrorKind::argument, "volume dims must be positive");
    if (c.ct.hu.size() != voxel_count(c.ct.dims)) fail(ErrorKind::argument, "CT voxel count does not match dims");
    for (const auto& m : c.masks) {
        if (!is_structure_label(m.label)) fail(ErrorKind::argument, "unknown structure label \"" + m.label + "\"");
        if (m.dims != c.ct.dims || !same_frame(m.frame, c.ct.frame))
            fail(ErrorKind::argument, "mask \"" + m.label + "\" does not share the CT grid");
        if (m.bits.size() != voxel_count(m.dims))
            fail(ErrorKind::argument, "mask \"" + m.label + "\" voxel count does not match dims");
    }
}

namespace {

json vec3_json(Vec3 v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec3_from(const json& j, const char* what)
{
    if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() || !j[2].is_number())
        fail(ErrorKind::format, std::string("meta.json: \"") + what + "\" must be 3 numbers");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

Cohort read_cohort(const std::filesystem::path& dir)
{
    const json meta = read_json(dir / "meta.json");
    if (!meta.is_object()) fail(ErrorKind::format, "meta.json must be an object");
    static const std::set<std::string> known = {"format", "version", "dims", "spacing", "origin",
                                                "hu_clamp", "labels", "direction"};
    for (auto it = meta.begin(); it != meta.end(); ++it)
        if (!known.count(it.key())) fail(ErrorKind::format, "meta.json: unknown key \"" + it.key() + "\"");
    for (const char* k : {"dims", "spacing", "origin", "labels"})
        if (!meta.contains(k)) fail(ErrorKind::format, std::string("meta.json: missing \"") + k + "\"");

    Cohort c;
    const json& dims = meta["dims"];
    if (!dims.is_array() || dims.size() != 3) fail(ErrorKind::format, "meta.json: \"dims\" must be 3 integers");
    for (int a = 0; a < 3; ++a) {
        if (!dims[a].is_number_integer() || dims[a].get<long long>() <= 0 || dims[a].get<long long>() > 4096)
            fail(ErrorKind::format, "meta.json: dims must be positive integers <= 4096");
        c.ct.dims[a] = dims[a].get<int>();
    }
    c.ct.frame.spacing = vec3_from(meta["spacing"], "spacing");
    c.ct.frame.origin = vec3_from(meta["origin"], "origin");
    if (!(c.ct.frame.spacing.x > 0 && c.ct.frame.spacing.y > 0 && c.ct.frame.spacing.z > 0))
        fail(ErrorKind::format, "meta.json: spacing must be strictly positive");
    if (meta.contains("direction")) {
        const json& d = meta["direction"];
        const double id[9] = {1, 0, 0, 0, 1, 0, 0, 0, 1};
        bool ok = d.is_array() && d.size() == 9;
        for (std::size_t i = 0; ok && i < 9; ++i) ok = d[i].is_number() && std::fabs(d[i].get<double>() - id[i]) < 1e-9;
        if (!ok) fail(ErrorKind::format, "meta.json: oblique or malformed direction; only axis-aligned volumes are accepted");
    }
    if (meta.contains("hu_clamp")) {
        const json& h = meta["hu_clamp"];
        if (!h.is_array() || h.size() != 2 || !h[0].is_number() || !h[1].is_number() ||
            h[0].get<double>() > h[1].get<double>())
            fail(ErrorKind::format, "meta.json: \"hu_clamp\" must be [lo, hi]");
        c.hu_min = h[0].get<double>();
        c.hu_max = h[1].get<double>();
    }

    const std::size_t n = voxel_count(c.ct.dims);
    const std::string ct = read_file(dir / "ct.raw");
    if (ct.size() != 2 * n)
        fail(ErrorKind::format, "ct.raw holds " + std::to_string(ct.size() / 2) + " voxels but header dims give " +
                                    std::to_string(n));
    c.ct.hu.resize(n);
    const auto lo = static_cast<std::int16_t>(std::max(-32768.0, std::ceil(c.hu_min)));
    const auto hi = static_cast<std::int16_t>(std::min(32767.0, std::floor(c.hu_max)));
    for (std::size_t i = 0; i < n; ++i) {
        const auto b0 = static_cast<unsigned char>(ct[2 * i]), b1 = static_cast<unsigned char>(ct[2 * i + 1]);
        const auto v = static_cast<std::int16_t>(static_cast<std::uint16_t>(b0 | (b1 << 8)));
        c.ct.hu[i] = std::clamp(v, lo, hi);
    }

    const json& labels = meta["labels"];
    if (!labels.is_array()) fail(ErrorKind::format, "meta.json: \"labels\" must be a list");
    std::set<std::string> seen;
    for (const auto& l : labels) {
        if (!l.is_string()) fail(ErrorKind::format, "meta.json: labels must be strings");
        const std::string label = l.get<std::string>();
        if (!is_structure_label(label)) fail(ErrorKind::format, "meta.json: unknown structure label \"" + label + "\"");
        if (!seen.insert(label).second) fail(ErrorKind::format, "meta.json: duplicate label \"" + label + "\"");
        StructureMask m;
        m.frame = c.ct.frame;
        m.dims = c.ct.dims;
        m.label = label;
        const std::string raw = read_file(dir / (label + ".raw"));
        if (raw.size() != n)
            fail(ErrorKind::format, label + ".raw holds " + std::to_string(raw.size()) +
                                        " voxels but header dims give " + std::to_string(n));
        m.bits.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto b = static_cast<unsigned char>(raw[i]);
            if (b > 1) fail(ErrorKind::format, label + ".raw contains a value other than 0/1");
            m.bits[i] = b;
        }
        c.masks.push_back(std::move(m));
    }
    return c;
}

void write_cohort(const Cohort& c, const std::filesystem::path& dir)
{
    check_cohort(c);
    std::filesystem::create_directories(dir);
    const std::size_t n = voxel_count(c.ct.dims);
    std::string ct(2 * n, '\0');
    for (std::size_t i = 0; i < n; ++i) {
        const auto u = static_cast<std::uint16_t>(c.ct.hu[i]);
        ct[2 * i] = static_cast<char>(u & 0xff);
        ct[2 * i + 1] = static_cast<char>(u >> 8);
    }
    write_file_atomic(dir / "ct.raw", ct);
    json labels = json::array();
    for (const auto& m : c.masks) {
        write_file_atomic(dir / (m.label + ".raw"), std::string(m.bits.begin(), m.bits.end()));
        labels.push_back(m.label);
    }
    json meta = {{"format", "wbrt-cohort"},
                 {"version", 1},
                 {"dims", json::array({c.ct.dims[0], c.ct.dims[1], c.ct.dims[2]})},
                 {"spacing", vec3_json(c.ct.frame.spacing)},
                 {"origin", vec3_json(c.ct.frame.origin)},
                 {"hu_clamp", json::array({c.hu_min, c.hu_max})},
                 {"labels", labels}};
    write_json(dir / "meta.json", meta);
}

}  // namespace wbrt
