#pragma once

// Reflection of clamped biharmonic functions across the line y1 = 0:
//   H*(y) = -H(y*) - 2 y1 d1H(y*) - y1^2 (Lap H)(y*),  y* = (-y1, y2),  y1 > 0.
// The derivatives at y* are taken with 9-point finite-difference windows.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "biharm/error.hpp"
#include "biharm/geometry.hpp"

namespace biharm {

/// Nodes (y1, y2) = ((r - M) h, y2_lo + c h) for r = 0 .. M + P, c = 0 .. ny - 1.
/// Rows r <= M hold the given half-plane data, rows r > M the extension.
struct ReflectionField {
    double h = 0.0;
    int below = 0; ///< M: rows strictly below the interface
    int above = 0; ///< P: extension rows
    int ny = 0;
    double y2_lo = 0.0;
    std::vector<double> values; ///< row-major, (M + P + 1) x ny
    bool extended = false;

    int rows() const noexcept { return below + above + 1; }
    double y1(int r) const noexcept { return (r - below) * h; }
    double y2(int c) const noexcept { return y2_lo + c * h; }
    double& at(int r, int c) { return values[static_cast<std::size_t>(r) * ny + c]; }
    double at(int r, int c) const { return values[static_cast<std::size_t>(r) * ny + c]; }
};

/// Samples f on y1 in [-depth, 0], y2 in [y2_lo, y2_hi] and reserves `height`
/// worth of rows above the interface. Extents are rounded to whole nodes.
inline ReflectionField sample_halfplane(const std::function<double(Point2)>& f, double h, double depth, double height,
                                        double y2_lo, double y2_hi) {
    if (!(h > 0.0)) throw std::invalid_argument("reflection grid spacing must be > 0");
    ReflectionField F;
    F.h = h;
    F.below = static_cast<int>(std::lround(depth / h));
    F.above = static_cast<int>(std::lround(height / h));
    F.ny = static_cast<int>(std::lround((y2_hi - y2_lo) / h)) + 1;
    F.y2_lo = y2_lo;
    if (F.below < 4) throw std::invalid_argument("reflection needs at least 4 node layers below the interface");
    if (F.above > F.below) throw std::invalid_argument("extension height exceeds the sampled depth");
    if (F.ny < 5) throw std::invalid_argument("reflection grid needs at least 5 columns");
    F.values.assign(static_cast<std::size_t>(F.rows()) * F.ny, 0.0);
    for (int r = 0; r <= F.below; ++r)
        for (int c = 0; c < F.ny; ++c) F.at(r, c) = f({F.y1(r), F.y2(c)});
    return F;
}

namespace detail {

/// Finite-difference weights for derivatives 0..2 at z on nodes x (Fornberg).
/// Returns w[k][j], the weight of node j in the k-th derivative.
inline std::array<std::vector<double>, 3> fornberg_weights(double z, const std::vector<double>& x) {
    const int n = static_cast<int>(x.size());
    std::vector<std::array<double, 3>> c(n, {0.0, 0.0, 0.0});
    double c1 = 1.0, c4 = x[0] - z;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, 2);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - z;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::array<std::vector<double>, 3> w;
    for (int k = 0; k < 3; ++k) {
        w[k].resize(n);
        for (int j = 0; j < n; ++j) w[k][j] = c[j][k];
    }
    return w;
}

inline constexpr int kWindow = 9;

/// Window of up to kWindow consecutive nodes around `centre`, kept inside [lo, hi].
struct Window {
    int start;
    int size;
    std::array<std::vector<double>, 3> w; ///< weights for derivative orders 0..2
};

inline Window window(int centre, int lo, int hi, double h) {
    const int size = std::min(kWindow, hi - lo + 1);
    const int start = std::clamp(centre - size / 2, lo, hi - size + 1);
    std::vector<double> x(size);
    for (int j = 0; j < size; ++j) x[j] = (start + j) * h;
    return {start, size, fornberg_weights(centre * h, x)};
}

} // namespace detail

struct BoundaryDataCheck {
    double max_value = 0.0;      ///< max |H(0, y2)|
    double max_normal = 0.0;     ///< max |d1 H(0, y2)|
    double scale = 0.0;          ///< max |H| over the sampled half-plane
    bool ok = true;
};

/// H = d1H = 0 on y1 = 0 to O(h^2) and O(h) respectively, relative to max |H|.
inline BoundaryDataCheck check_boundary_data(const ReflectionField& F, double factor = 10.0) {
    BoundaryDataCheck chk;
    for (int r = 0; r <= F.below; ++r)
        for (int c = 0; c < F.ny; ++c) chk.scale = std::max(chk.scale, std::abs(F.at(r, c)));
    const int M = F.below;
    const auto win = detail::window(M, 0, M, F.h);
    for (int c = 0; c < F.ny; ++c) {
        double d1 = 0.0;
        for (int j = 0; j < win.size; ++j) d1 += win.w[1][j] * F.at(win.start + j, c);
        chk.max_value = std::max(chk.max_value, std::abs(F.at(M, c)));
        chk.max_normal = std::max(chk.max_normal, std::abs(d1));
    }
    const double s = std::max(chk.scale, std::numeric_limits<double>::min());
    chk.ok = chk.max_value <= factor * F.h * F.h * s && chk.max_normal <= factor * F.h * s;
    return chk;
}

/// Fills the rows above the interface with the reflection formula.
/// Throws std::invalid_argument when `check_boundary` is set and the data
/// violate H = d1H = 0 on the interface.
inline ReflectionField duffin_extend(ReflectionField F, bool check_boundary = true) {
    if (F.values.size() != static_cast<std::size_t>(F.rows()) * F.ny)
        throw std::invalid_argument("reflection field has inconsistent size");
    if (check_boundary) {
        const auto chk = check_boundary_data(F);
        if (!chk.ok)
            throw std::invalid_argument("boundary data violate H = dH/dy1 = 0 (|H| <= " + detail::sci(chk.max_value) +
                                        ", |dH/dy1| <= " + detail::sci(chk.max_normal) + ")");
    }
    const int M = F.below;
    for (int r = M + 1; r < F.rows(); ++r) {
        const int rs = 2 * M - r; // reflected row
        const double t = F.y1(r);
        const auto w1 = detail::window(rs, 0, M, F.h);
        for (int c = 0; c < F.ny; ++c) {
            const auto w2 = detail::window(c, 0, F.ny - 1, F.h);
            double d1 = 0.0, d11 = 0.0, d22 = 0.0;
            for (int j = 0; j < w1.size; ++j) {
                const double v = F.at(w1.start + j, c);
                d1 += w1.w[1][j] * v;
                d11 += w1.w[2][j] * v;
            }
            for (int j = 0; j < w2.size; ++j) d22 += w2.w[2][j] * F.at(rs, w2.start + j);
            F.at(r, c) = -F.at(rs, c) - 2.0 * t * d1 - t * t * (d11 + d22);
        }
    }
    F.extended = true;
    return F;
}

/// max |13-point bilaplacian of H*| over nodes with |y1| <= band whose
/// stencil fits inside the grid.
inline double duffin_residual(const ReflectionField& F, double band) {
    if (!F.extended) throw std::invalid_argument("duffin_residual needs an extended field");
    const double s = 1.0 / std::pow(F.h, 4);
    double worst = 0.0;
    for (int r = 2; r + 2 < F.rows(); ++r) {
        if (std::abs(F.y1(r)) > band + 1e-12 * F.h) continue;
        for (int c = 2; c + 2 < F.ny; ++c) {
            const double v = 20.0 * F.at(r, c) -
                             8.0 * (F.at(r - 1, c) + F.at(r + 1, c) + F.at(r, c - 1) + F.at(r, c + 1)) +
                             2.0 * (F.at(r - 1, c - 1) + F.at(r - 1, c + 1) + F.at(r + 1, c - 1) + F.at(r + 1, c + 1)) +
                             F.at(r - 2, c) + F.at(r + 2, c) + F.at(r, c - 2) + F.at(r, c + 2);
            worst = std::max(worst, std::abs(v) * s);
        }
    }
    return worst;
}

struct DuffinRow {
    double h;
    double residual;
    double ratio; ///< residual(previous h) / residual; NaN on the first row
};

struct DuffinOptions {
    double depth = 0.5;  ///< sampled y1 range below the interface
    double height = 0.5; ///< extension range above it
    double y2_lo = -0.5;
    double y2_hi = 0.5;
    double band = 0.125; ///< residual band half-width around y1 = 0
    bool check_boundary = true;
};

/// Residual of the reflected field for each spacing in `h_list`.
inline std::vector<DuffinRow> duffin_convergence(const std::function<double(Point2)>& f,
                                                 const std::vector<double>& h_list, const DuffinOptions& opt = {}) {
    std::vector<DuffinRow> rows;
    for (double h : h_list) {
        const auto F = duffin_extend(sample_halfplane(f, h, opt.depth, opt.height, opt.y2_lo, opt.y2_hi),
                                     opt.check_boundary);
        const double res = duffin_residual(F, opt.band);
        const double ratio = rows.empty() ? std::numeric_limits<double>::quiet_NaN() : rows.back().residual / res;
        rows.push_back({h, res, ratio});
    }
    return rows;
}

} // namespace biharm
