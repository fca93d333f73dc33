#include "wbrt/morphology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wbrt/errors.hpp"

namespace wbrt {

namespace {

constexpr double kFar = 1e20;

// Felzenszwalb-Huttenlocher lower envelope of parabolas, 1D.
void edt_1d(const double* f, double* d, int n, std::vector<int>& v, std::vector<double>& z)
{
    v.resize(n);
    z.resize(n + 1);
    int k = 0;
    v[0] = 0;
    z[0] = -INFINITY;
    z[1] = INFINITY;
    auto meet = [&](int q, int p) { return ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * q - 2.0 * p); };
    for (int q = 1; q < n; ++q) {
        double s = meet(q, v[k]);
        while (s <= z[k]) {
            --k;
            s = meet(q, v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = INFINITY;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double dq = q - v[k];
        d[q] = dq * dq + f[v[k]];
    }
}

}  // namespace

std::vector<double> distance_sq(const std::vector<std::uint8_t>& feature, int cols, int rows)
{
    std::vector<double> g(feature.size());
    for (std::size_t i = 0; i < feature.size(); ++i) g[i] = feature[i] ? 0.0 : kFar;
    std::vector<int> v;
    std::vector<double> z;
    std::vector<double> f(std::max(cols, rows)), d(std::max(cols, rows));
    for (int c = 0; c < cols; ++c) {
        for (int r = 0; r < rows; ++r) f[r] = g[static_cast<std::size_t>(r) * cols + c];
        edt_1d(f.data(), d.data(), rows, v, z);
        for (int r = 0; r < rows; ++r) g[static_cast<std::size_t>(r) * cols + c] = d[r];
    }
    for (int r = 0; r < rows; ++r) {
        double* row = g.data() + static_cast<std::size_t>(r) * cols;
        std::copy(row, row + cols, f.begin());
        edt_1d(f.data(), d.data(), cols, v, z);
        std::copy(d.begin(), d.begin() + cols, row);
    }
    for (double& x : g) x = std::min(x, kFar);
    return g;
}

namespace {

double radius_px_sq(const BevSilhouette& s, double radius_mm)
{
    if (!(radius_mm >= 0)) fail(ErrorKind::argument, "morphology radius must be >= 0");
    const double r = radius_mm / s.frame.spacing;
    return r * r;
}

}  // namespace

BevSilhouette dilate(const BevSilhouette& s, double radius_mm)
{
    const double r2 = radius_px_sq(s, radius_mm);
    BevSilhouette out = s;
    if (!s.any()) return out;
    const auto d = distance_sq(s.bits, s.frame.cols, s.frame.rows);
    for (std::size_t i = 0; i < d.size(); ++i) out.bits[i] = d[i] <= r2 + 1e-9 ? 1 : 0;
    return out;
}

BevSilhouette erode(const BevSilhouette& s, double radius_mm)
{
    const double r2 = radius_px_sq(s, radius_mm);
    const int cols = s.frame.cols + 2, rows = s.frame.rows + 2;
    std::vector<std::uint8_t> bg(static_cast<std::size_t>(cols) * rows, 1);
    for (int r = 0; r < s.frame.rows; ++r)
        for (int c = 0; c < s.frame.cols; ++c)
            bg[static_cast<std::size_t>(r + 1) * cols + c + 1] = s.at(c, r) ? 0 : 1;
    const auto d = distance_sq(bg, cols, rows);
    BevSilhouette out = s;
    for (int r = 0; r < s.frame.rows; ++r)
        for (int c = 0; c < s.frame.cols; ++c) {
            const double dd = d[static_cast<std::size_t>(r + 1) * cols + c + 1];
            out.bits[s.frame.index(c, r)] = (s.at(c, r) && dd > r2 + 1e-9) ? 1 : 0;
        }
    return out;
}

BevSilhouette close(const BevSilhouette& s, double radius_mm)
{
    return erode(dilate(s, radius_mm), radius_mm);
}

Components components(const BevSilhouette& s)
{
    const int cols = s.frame.cols, rows = s.frame.rows;
    Components out;
    out.label.assign(s.bits.size(), -1);
    std::vector<std::size_t> stack;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const std::size_t i0 = s.frame.index(c, r);
            if (!s.bits[i0] || out.label[i0] >= 0) continue;
            const int id = static_cast<int>(out.sizes.size());
            out.sizes.push_back(0);
            out.label[i0] = id;
            stack.assign(1, i0);
            while (!stack.empty()) {
                const std::size_t i = stack.back();
                stack.pop_back();
                ++out.sizes[id];
                const int pc = static_cast<int>(i % cols), pr = static_cast<int>(i / cols);
                for (int dr = -1; dr <= 1; ++dr)
                    for (int dc = -1; dc <= 1; ++dc) {
                        const int nc = pc + dc, nr = pr + dr;
                        if ((dc == 0 && dr == 0) || nc < 0 || nr < 0 || nc >= cols || nr >= rows) continue;
                        const std::size_t j = s.frame.index(nc, nr);
                        if (s.bits[j] && out.label[j] < 0) {
                            out.label[j] = id;
                            stack.push_back(j);
                        }
                    }
            }
        }
    return out;
}

std::vector<BevSilhouette> largest_components(const BevSilhouette& s, std::size_t k)
{
    const Components comp = components(s);
    std::vector<int> order(comp.sizes.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return comp.sizes[a] > comp.sizes[b]; });
    if (order.size() > k) order.resize(k);
    std::vector<BevSilhouette> out;
    for (int id : order) {
        BevSilhouette piece = BevSilhouette::empty(s.frame, s.label);
        for (std::size_t i = 0; i < comp.label.size(); ++i)
            if (comp.label[i] == id) piece.bits[i] = 1;
        out.push_back(std::move(piece));
    }
    return out;
}

}  // namespace wbrt
