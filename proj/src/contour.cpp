#include "wbrt/contour.hpp"

#include <cstdint>
#include <unordered_map>

namespace wbrt {

namespace {

// Edge points in half-pixel units relative to pixel (0,0): (2c+1, 2r) lies between
// pixels (c,r) and (c+1,r); (2c, 2r+1) between (c,r) and (c,r+1).
struct Key {
    int x;
    int y;
};

std::uint64_t pack(Key k)
{
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.x)) << 32) |
           static_cast<std::uint32_t>(k.y);
}

enum Side { B, R, T, L };

Key edge_point(int c, int r, Side s)
{
    switch (s) {
    case B: return {2 * c + 1, 2 * r};
    case R: return {2 * c + 2, 2 * r + 1};
    case T: return {2 * c + 1, 2 * r + 2};
    case L: return {2 * c, 2 * r + 1};
    }
    return {0, 0};
}

// Segments per cell case (bits: bl=1, br=2, tr=4, tl=8), set region on the left.
struct Seg {
    Side from;
    Side to;
};
struct CaseSegs {
    int n;
    Seg s[2];
};

constexpr CaseSegs kCases[16] = {
    {0, {}},
    {1, {{B, L}}},
    {1, {{R, B}}},
    {1, {{R, L}}},
    {1, {{T, R}}},
    {2, {{B, R}, {T, L}}},
    {1, {{T, B}}},
    {1, {{T, L}}},
    {1, {{L, T}}},
    {1, {{B, T}}},
    {2, {{L, B}, {R, T}}},
    {1, {{R, T}}},
    {1, {{L, R}}},
    {1, {{B, R}}},
    {1, {{L, B}}},
    {0, {}},
};

}  // namespace

std::vector<Polyline2D> extract_contour(const BevSilhouette& mask)
{
    const BevFrame& f = mask.frame;
    auto at = [&](int c, int r) {
        return c >= 0 && r >= 0 && c < f.cols && r < f.rows && mask.at(c, r);
    };

    std::unordered_map<std::uint64_t, Key> next;
    std::vector<Key> starts;
    for (int r = -1; r < f.rows; ++r)
        for (int c = -1; c < f.cols; ++c) {
            const int idx = (at(c, r) ? 1 : 0) | (at(c + 1, r) ? 2 : 0) | (at(c + 1, r + 1) ? 4 : 0) |
                            (at(c, r + 1) ? 8 : 0);
            const CaseSegs& cs = kCases[idx];
            for (int i = 0; i < cs.n; ++i) {
                const Key a = edge_point(c, r, cs.s[i].from);
                const Key b = edge_point(c, r, cs.s[i].to);
                next.emplace(pack(a), b);
                starts.push_back(a);
            }
        }

    std::vector<Polyline2D> out;
    std::unordered_map<std::uint64_t, bool> used;
    used.reserve(next.size());
    for (const Key& s : starts) {
        if (used[pack(s)]) continue;
        Polyline2D line;
        line.closed = true;
        Key k = s;
        while (!used[pack(k)]) {
            used[pack(k)] = true;
            line.pts.push_back({f.u0 + 0.5 * k.x * f.spacing, f.v0 + 0.5 * k.y * f.spacing});
            k = next.at(pack(k));
        }
        out.push_back(std::move(line));
    }
    return out;
}

}  // namespace wbrt
