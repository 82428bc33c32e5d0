#pragma once

// Closed-form biharmonic kernels: fundamental solution, Boggio's half-space
// and ball Green functions in any dimension n >= 2, and the two-sided
// comparison function H(x,y) built from boundary distances.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>

namespace biharm {

enum class DimensionCase { two, three, four, above_four };

/// Spatial dimension, n >= 2.
class Dimension {
public:
    explicit Dimension(int n) : n_(n) {
        if (n < 2) throw std::invalid_argument("dimension must be >= 2, got " + std::to_string(n));
    }

    int value() const noexcept { return n_; }
    DimensionCase kind() const noexcept {
        switch (n_) {
        case 2: return DimensionCase::two;
        case 3: return DimensionCase::three;
        case 4: return DimensionCase::four;
        default: return DimensionCase::above_four;
        }
    }
    friend bool operator==(Dimension, Dimension) = default;

private:
    int n_;
};

namespace detail {

inline constexpr int kBallVolumeTableSize = 17;

// e_0 = 1, e_1 = 2, e_n = (2 pi / n) e_{n-2}
inline constexpr std::array<double, kBallVolumeTableSize> ball_volume_table = [] {
    std::array<double, kBallVolumeTableSize> t{};
    t[0] = 1.0;
    t[1] = 2.0;
    for (int n = 2; n < kBallVolumeTableSize; ++n) t[n] = 2.0 * std::numbers::pi / n * t[n - 2];
    return t;
}();

inline void require_finite_nonnegative(double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v))
        throw std::invalid_argument(std::string(name) + " must be finite and >= 0");
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double squared_norm(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return s;
}

inline void require_size(std::span<const double> p, Dimension n, const char* name) {
    if (static_cast<int>(p.size()) != n.value())
        throw std::invalid_argument(std::string(name) + " has " + std::to_string(p.size()) +
                                    " coordinates, expected " + std::to_string(n.value()));
    for (double v : p)
        if (!std::isfinite(v)) throw std::invalid_argument(std::string(name) + " has a non-finite coordinate");
}

// sqrt(1 + q) - 1 without cancellation for small q.
inline double sqrt1pm1(double q) { return q / (1.0 + std::sqrt(1.0 + q)); }

} // namespace detail

/// Volume of the unit ball in R^n.
inline double unit_ball_volume(int n) {
    if (n < 0) throw std::invalid_argument("unit_ball_volume: negative dimension");
    if (n < detail::kBallVolumeTableSize) return detail::ball_volume_table[n];
    return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

/// 1 / (4 n e_n); equals 1/(8 pi) for n = 2.
inline double boggio_prefactor(Dimension n) {
    return 1.0 / (4.0 * n.value() * unit_ball_volume(n.value()));
}

/// Radial solution of Delta^2 F = delta in R^n.
inline double fundamental_solution(Dimension n, double r) {
    if (!(r > 0.0) || !std::isfinite(r))
        throw std::invalid_argument("fundamental_solution: r must be finite and > 0");
    constexpr double pi = std::numbers::pi;
    switch (n.kind()) {
    case DimensionCase::two: return r * r * std::log(r) / (8.0 * pi);
    case DimensionCase::four: return -std::log(r) / (8.0 * pi * pi);
    default: {
        const int d = n.value();
        const double sphere = d * unit_ball_volume(d);
        return std::pow(r, 4.0 - d) / (2.0 * (d - 2) * (d - 4) * sphere);
    }
    }
}

/// \int_1^{1+t} (v^2 - 1) v^{1-n} dv for t >= 0.
///
/// Substituting v = e^u turns the integrand into e^{(4-n)u} - e^{(2-n)u}, whose
/// Taylor series in L = log(1+t) has no cancelling leading terms; that series is
/// used for t < 1/64 where the closed forms lose digits.
inline double boggio_integral_shifted(Dimension n, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("boggio_integral: A must be >= 1");
    if (t == 0.0) return 0.0;
    if (std::isinf(t)) return std::numeric_limits<double>::infinity();
    const int d = n.value();

    if (t < 1.0 / 64.0) {
        const double L = std::log1p(t);
        const double a = 4.0 - d, b = 2.0 - d;
        double pa = a, pb = b;
        double f = 0.5 * L * L; // L^{k+1} / (k+1)!
        double sum = 0.0;
        for (int k = 1; k < 80; ++k) {
            const double term = (pa - pb) * f;
            sum += term;
            if (k > 2 && (std::abs(pa) + std::abs(pb)) * f <= 1e-18 * std::abs(sum)) break;
            pa *= a;
            pb *= b;
            f *= L / (k + 2);
        }
        return sum;
    }

    const double A = 1.0 + t;
    switch (n.kind()) {
    case DimensionCase::two: return 0.5 * t * (2.0 + t) - std::log1p(t);
    case DimensionCase::three: return t * t / A;
    case DimensionCase::four: return std::log1p(t) + 0.5 * (1.0 / (A * A) - 1.0);
    case DimensionCase::above_four: {
        const double m = d - 4.0;
        const double lnA = std::log1p(t);
        return -std::expm1(-m * lnA) / m + std::expm1(-(m + 2.0) * lnA) / (m + 2.0);
    }
    }
    return 0.0;
}

/// \int_1^A (v^2 - 1) v^{1-n} dv, A >= 1.
inline double boggio_integral(Dimension n, double A) {
    if (!(A >= 1.0)) throw std::invalid_argument("boggio_integral: A must be >= 1");
    return boggio_integral_shifted(n, A - 1.0);
}

/// Green function of Delta^2 with clamped conditions on {x_1 < 0}.
/// Diagonal values are the analytic limits for n = 2, 3.
inline double halfspace_green(Dimension n, std::span<const double> xi, std::span<const double> eta) {
    detail::require_size(xi, n, "xi");
    detail::require_size(eta, n, "eta");
    if (xi[0] > 0.0 || eta[0] > 0.0)
        throw std::domain_error("halfspace_green: points must satisfy x_1 <= 0");

    const double r2 = detail::squared_distance(xi, eta);
    const double pre = boggio_prefactor(n);
    if (r2 == 0.0) {
        switch (n.kind()) {
        case DimensionCase::two: return pre * 2.0 * xi[0] * xi[0]; // xi_1^2 / (4 pi)
        case DimensionCase::three: return pre * 2.0 * std::abs(xi[0]); // |xi_1| / (8 pi)
        default: throw std::domain_error("halfspace_green: diagonal is singular for n >= 4");
        }
    }
    // |xi* - eta|^2 = |xi - eta|^2 + 4 xi_1 eta_1
    const double q = 4.0 * xi[0] * eta[0] / r2;
    const double t = detail::sqrt1pm1(q);
    const double r = std::sqrt(r2);
    return pre * std::pow(r, 4.0 - n.value()) * boggio_integral_shifted(n, t);
}

/// Boggio's Green function of the ball of the given radius centred at 0.
inline double ball_green(Dimension n, std::span<const double> x, std::span<const double> y, double radius = 1.0) {
    detail::require_size(x, n, "x");
    detail::require_size(y, n, "y");
    if (!(radius > 0.0) || !std::isfinite(radius)) throw std::invalid_argument("ball_green: radius must be > 0");

    const double R2 = radius * radius;
    const double nx2 = detail::squared_norm(x) / R2;
    const double ny2 = detail::squared_norm(y) / R2;
    if (nx2 > 1.0 || ny2 > 1.0) throw std::domain_error("ball_green: points must lie in the closed ball");

    const double sx = std::max(0.0, (1.0 - std::sqrt(nx2)) * (1.0 + std::sqrt(nx2)));
    const double sy = std::max(0.0, (1.0 - std::sqrt(ny2)) * (1.0 + std::sqrt(ny2)));
    const double r2 = detail::squared_distance(x, y) / R2;
    const double pre = boggio_prefactor(n);
    const double scale = std::pow(radius, 4.0 - n.value());

    if (r2 == 0.0) {
        switch (n.kind()) {
        case DimensionCase::two: return scale * pre * 0.5 * sx * sx;
        case DimensionCase::three: return scale * pre * sx;
        default: throw std::domain_error("ball_green: diagonal is singular for n >= 4");
        }
    }
    const double t = detail::sqrt1pm1(sx * sy / r2);
    return scale * pre * std::pow(r2, 0.5 * (4.0 - n.value())) * boggio_integral_shifted(n, t);
}

/// Arguments of the comparison function: dimension, d(x), d(y), |x - y|.
struct HInput {
    Dimension n;
    double dx;
    double dy;
    double r;
};

namespace detail {
inline void validate(const HInput& h) {
    require_finite_nonnegative(h.dx, "dx");
    require_finite_nonnegative(h.dy, "dy");
    require_finite_nonnegative(h.r, "r");
}
} // namespace detail

/// H(x,y): r^{4-n} min{1, d_x^2 d_y^2 / r^4} for n > 4, log(1 + d_x^2 d_y^2 / r^4)
/// for n = 4, d_x^{2-n/2} d_y^{2-n/2} min{1, (d_x d_y)^{n/2} / r^n} for n = 2, 3.
/// The r = 0 limit is +inf for n >= 4 unless a point sits on the boundary.
inline double h_estimate(const HInput& h) {
    detail::validate(h);
    const double D = h.dx * h.dy;
    if (D == 0.0) return 0.0;
    const double inf = std::numeric_limits<double>::infinity();
    const double r2 = h.r * h.r;
    switch (h.n.kind()) {
    case DimensionCase::two: return h.r == 0.0 ? D : D * std::min(1.0, D / r2);
    case DimensionCase::three: {
        const double s = std::sqrt(D);
        return h.r == 0.0 ? s : s * std::min(1.0, D * s / (r2 * h.r));
    }
    case DimensionCase::four: return h.r == 0.0 ? inf : std::log1p((D / r2) * (D / r2));
    case DimensionCase::above_four:
        if (h.r == 0.0) return inf;
        return std::pow(h.r, 4.0 - h.n.value()) * std::min(1.0, (D / r2) * (D / r2));
    }
    return 0.0;
}

/// H(x,y) evaluated through the explicit two-case form: d_x d_y <= r^2 (far)
/// versus d_x d_y > r^2 (near).
inline double h_case_form(const HInput& h) {
    detail::validate(h);
    const double D = h.dx * h.dy;
    const double r2 = h.r * h.r;
    const int n = h.n.value();
    if (D <= r2) {
        if (D == 0.0) return 0.0;
        if (h.n.kind() == DimensionCase::four) return std::log1p((D / r2) * (D / r2));
        return D * D / std::pow(h.r, n);
    }
    switch (h.n.kind()) {
    case DimensionCase::two: return D;
    case DimensionCase::three: return std::sqrt(D);
    case DimensionCase::four:
        return h.r == 0.0 ? std::numeric_limits<double>::infinity() : std::log1p((D / r2) * (D / r2));
    case DimensionCase::above_four:
        return h.r == 0.0 ? std::numeric_limits<double>::infinity() : std::pow(h.r, 4.0 - n);
    }
    return 0.0;
}

} // namespace biharm
