#pragma once

// Empirical checks of the pointwise Green function estimates: fitted band
// constants (c1, c2), positivity radius, size of the negative part, the
// lower bound near the diagonal, and blow-up towards the half-space kernel.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "biharm/geometry.hpp"
#include "biharm/kernels.hpp"
#include "biharm/random.hpp"
#include "biharm/solver.hpp"

namespace biharm {

/// Dimension-free view of an evaluated pair: d(x), d(y), |x - y| and G.
struct KernelSample {
    double dx;
    double dy;
    double r;
    double G;
};

/// A planar pair with G and H = h_estimate(n = 2, ...) attached. `h` is the
/// grid spacing of the solve, 0 for exact kernels.
struct GreenSample {
    PointPair pair;
    double G;
    double H;
    double h;

    KernelSample kernel() const { return {pair.dx, pair.dy, pair.r, G}; }
};

inline GreenSample make_sample(const PointPair& p, double G, double h = 0.0) {
    return {p, G, h_estimate({Dimension(2), p.dx, p.dy, p.r}), h};
}

/// Samples from the exact disk kernel.
inline std::vector<GreenSample> exact_disk_samples(const DomainSpec& disk, const std::vector<PointPair>& pairs) {
    std::vector<GreenSample> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(make_sample(p, disk_green_exact(disk, p.x, p.y)));
    return out;
}

/// Samples from the discrete Green function.
inline std::vector<GreenSample> discrete_samples(const DiscreteGreen& green, const std::vector<PointPair>& pairs) {
    const auto G = green.evaluate(pairs);
    std::vector<GreenSample> out;
    out.reserve(pairs.size());
    for (std::size_t k = 0; k < pairs.size(); ++k) out.push_back(make_sample(pairs[k], G[k], green.h()));
    return out;
}

// ---------------------------------------------------------------------------
// Band constants

/// Constants with c2^{-1} H <= G + c1 d(x)^2 d(y)^2 <= c2 H on every sample.
struct EstimateBand {
    double c1 = 0.0;     ///< margin-inflated value actually used
    double c1_raw = 0.0; ///< max(0, max -G / (d(x)^2 d(y)^2))
    double c2 = 1.0;
    double epsilon = 0.01;
    std::size_t samples = 0;
    std::string domain;
    std::uint64_t seed = 0;
    double h = 0.0;
};

/// c1 = (1 + eps) max(0, max -G/(dx^2 dy^2)); if that max is 0 but some G is
/// exactly 0, c1 = eps min{G > 0} / max{dx^2 dy^2}. Then
/// c2 = max over samples of max(S/H, H/S) with S = G + c1 dx^2 dy^2.
inline EstimateBand estimate_constants(std::span<const GreenSample> samples, double epsilon = 0.01) {
    if (samples.empty()) throw std::invalid_argument("estimate_constants: no samples");
    if (!(epsilon > 0.0)) throw std::invalid_argument("estimate_constants: epsilon must be > 0");
    double c1 = 0.0, max_w = 0.0, min_pos = std::numeric_limits<double>::infinity();
    bool has_zero = false;
    for (const auto& s : samples) {
        const double w = s.pair.dx * s.pair.dx * s.pair.dy * s.pair.dy;
        if (!(s.H > 0.0) || !(w > 0.0))
            throw std::invalid_argument("estimate_constants: sample with H <= 0 or on the boundary");
        if (!std::isfinite(s.G)) throw std::invalid_argument("estimate_constants: non-finite G");
        c1 = std::max(c1, -s.G / w);
        max_w = std::max(max_w, w);
        if (s.G > 0.0) min_pos = std::min(min_pos, s.G);
        if (s.G == 0.0) has_zero = true;
    }
    EstimateBand band;
    band.epsilon = epsilon;
    band.samples = samples.size();
    band.c1_raw = c1;
    if (c1 > 0.0) {
        band.c1 = (1.0 + epsilon) * c1;
    } else if (has_zero) {
        if (!std::isfinite(min_pos)) throw std::invalid_argument("estimate_constants: all samples have G = 0");
        band.c1 = epsilon * min_pos / max_w;
    }
    double c2 = 0.0;
    for (const auto& s : samples) {
        const double w = s.pair.dx * s.pair.dx * s.pair.dy * s.pair.dy;
        const double shifted = s.G + band.c1 * w;
        c2 = std::max({c2, shifted / s.H, s.H / shifted});
    }
    band.c2 = c2;
    return band;
}

/// Indices of samples outside the band, checked with a relative slack of
/// `rel_tol` to absorb the rounding in forming c2 itself.
inline std::vector<std::size_t> band_violations(std::span<const GreenSample> samples, const EstimateBand& band,
                                                double rel_tol = 1e-12) {
    std::vector<std::size_t> bad;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const auto& s = samples[k];
        const double w = s.pair.dx * s.pair.dx * s.pair.dy * s.pair.dy;
        const double mid = s.G + band.c1 * w;
        const double lo = s.H / band.c2, hi = band.c2 * s.H;
        if (!(mid >= lo * (1.0 - rel_tol)) || !(mid <= hi * (1.0 + rel_tol))) bad.push_back(k);
    }
    return bad;
}

// ---------------------------------------------------------------------------
// Positivity and negative part

/// Smallest |x - y| among samples with G <= 0, or `diameter` when every
/// sample is positive. An upper estimate of the positivity radius: no
/// counterexample was seen below it.
inline double positivity_radius(std::span<const GreenSample> samples, double diameter) {
    double r = diameter;
    for (const auto& s : samples)
        if (s.G <= 0.0) r = std::min(r, s.pair.r);
    return r;
}

struct NegativePartReport {
    double c = 0.0;
    std::vector<std::size_t> negatives;  ///< samples with G < 0
    std::vector<std::size_t> violations; ///< negatives with |G| > c d(x)^2 d(y)^2
    double worst_ratio = 0.0;            ///< max |G| / (c d(x)^2 d(y)^2)
    std::size_t worst_index = 0;
    /// Smallest constant c' with |G| <= c' |x-y|^{-2} d(x)^2 d(y)^2 (informational).
    double distance_weighted_constant = 0.0;
    double max_negative = 0.0; ///< max |G| over negatives
    double max_positive = 0.0; ///< max G over positives
    /// max_negative / max_positive (0 without negatives).
    double negative_to_positive = 0.0;
};

inline NegativePartReport negative_part_report(std::span<const GreenSample> samples, double c) {
    if (!(c >= 0.0)) throw std::invalid_argument("negative_part_report: c must be >= 0");
    NegativePartReport rep;
    rep.c = c;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const auto& s = samples[k];
        if (s.G > 0.0) {
            rep.max_positive = std::max(rep.max_positive, s.G);
            continue;
        }
        if (s.G == 0.0) continue;
        rep.negatives.push_back(k);
        const double a = -s.G;
        const double w = s.pair.dx * s.pair.dx * s.pair.dy * s.pair.dy;
        rep.max_negative = std::max(rep.max_negative, a);
        const double ratio = c > 0.0 ? a / (c * w) : std::numeric_limits<double>::infinity();
        if (ratio > rep.worst_ratio || rep.negatives.size() == 1) {
            rep.worst_ratio = std::max(rep.worst_ratio, ratio);
            rep.worst_index = k;
        }
        if (ratio > 1.0) rep.violations.push_back(k);
        rep.distance_weighted_constant = std::max(rep.distance_weighted_constant, a * s.pair.r * s.pair.r / w);
    }
    if (rep.max_positive > 0.0) rep.negative_to_positive = rep.max_negative / rep.max_positive;
    else if (rep.max_negative > 0.0) rep.negative_to_positive = std::numeric_limits<double>::infinity();
    return rep;
}

// ---------------------------------------------------------------------------
// Lower bound near the diagonal

/// Lower-bound profile on {r <= delta max(d(x), d(y))}: r^{4-n} for n > 4,
/// log(1 + r^{-4}) for n = 4, sqrt(d(x) d(y)) for n = 3, d(x) d(y) for n = 2.
inline double near_diagonal_profile(Dimension n, double dx, double dy, double r) {
    switch (n.kind()) {
    case DimensionCase::two: return dx * dy;
    case DimensionCase::three: return std::sqrt(dx * dy);
    case DimensionCase::four: return std::log1p(1.0 / (r * r * r * r));
    case DimensionCase::above_four: return std::pow(r, 4.0 - n.value());
    }
    return 0.0;
}

struct NehariResult {
    int n = 2;
    double delta = 0.5;
    std::size_t region_count = 0;
    double c3 = 0.0; ///< min G / profile over the region
    std::vector<std::size_t> violations; ///< region samples with G <= 0
};

inline bool in_nehari_region(const KernelSample& s, double delta) {
    return s.r <= delta * std::max(s.dx, s.dy);
}

inline NehariResult nehari_region_check(Dimension n, std::span<const KernelSample> samples, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("nehari_region_check: delta must be > 0");
    NehariResult res;
    res.n = n.value();
    res.delta = delta;
    res.c3 = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const auto& s = samples[k];
        if (!in_nehari_region(s, delta)) continue;
        ++res.region_count;
        if (s.G <= 0.0) res.violations.push_back(k);
        const double prof = near_diagonal_profile(n, s.dx, s.dy, s.r);
        if (prof > 0.0 && std::isfinite(prof)) res.c3 = std::min(res.c3, s.G / prof);
    }
    if (res.region_count == 0) throw std::invalid_argument("nehari_region_check: no sample lies in the region");
    return res;
}

/// Pairs in the ball of radius R in R^n with r <= delta max(d(x), d(y)),
/// evaluated with the exact ball kernel. y is uniform in the ball; x is placed
/// at a uniformly random direction and a distance drawn uniformly up to the
/// largest admissible value.
inline std::vector<KernelSample> ball_region_samples(Dimension n, double R, int count, std::uint64_t seed,
                                                     double delta) {
    if (count < 1) throw std::invalid_argument("ball_region_samples: count must be >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("ball_region_samples: delta must lie in (0, 1)");
    const int d = n.value();
    std::vector<KernelSample> out;
    out.reserve(static_cast<std::size_t>(count));
    std::vector<double> x(d), y(d), u(d);
    const auto gaussian = [](CounterRng& rng) {
        const double a = rng.uniform(), b = rng.uniform();
        return std::sqrt(-2.0 * std::log1p(-a)) * std::cos(2.0 * std::numbers::pi * b);
    };
    const auto unit = [&](CounterRng& rng, std::vector<double>& v) {
        double s = 0.0;
        do {
            s = 0.0;
            for (auto& c : v) {
                c = gaussian(rng);
                s += c * c;
            }
        } while (s == 0.0);
        s = std::sqrt(s);
        for (auto& c : v) c /= s;
    };
    for (int i = 0; i < count; ++i) {
        CounterRng rng(seed, static_cast<std::uint64_t>(i));
        for (;;) {
            unit(rng, u);
            const double ry = R * std::pow(rng.uniform(), 1.0 / d);
            for (int k = 0; k < d; ++k) y[k] = ry * u[k];
            const double dy = R - ry;
            if (!(dy > 0.0)) continue;
            unit(rng, u);
            // max(dx, dy) <= dy + r, so r <= delta dy / (1 - delta) covers the region.
            const double r = rng.uniform() * delta * dy / (1.0 - delta);
            if (!(r > 0.0)) continue;
            for (int k = 0; k < d; ++k) x[k] = y[k] + r * u[k];
            const double dx = R - std::sqrt(detail::squared_norm(x));
            if (!(dx > 0.0) || r > delta * std::max(dx, dy)) continue;
            out.push_back({dx, dy, r, ball_green(n, x, y, R)});
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Blow-up sequences

enum class BlowupRegime {
    pair_distance,    ///< rescale by |x_k - y_k|, scaling factor |x_k - y_k|^{n-4}
    boundary_distance ///< rescale by d(x_k), scaling factor d(x_k)^{-2}
};

struct BlowupOptions {
    Point2 xi{-1.0, 0.0};
    Point2 eta{-2.0, 0.0};
    /// Step k uses the geometric scale s_k = scale0 2^{-k}.
    double scale0 = 0.8;
    /// Grid spacing h_k = s_k / nodes_per_scale (and at most |x_k - y_k| / 8).
    double nodes_per_scale = 16.0;
    long node_budget = 1'000'000;
    SolveOptions solve{1e-10, SolveMethod::direct};
};

struct BlowupStep {
    int k = 0;
    double scale = 0.0; ///< |x_k - y_k| (regime A) or d(x_k) (regime B)
    double h = 0.0;
    long nodes = 0;
    Point2 x{}, y{};
    Point2 xi_k{}, eta_k{}; ///< rescaled points in the frame of the nearest boundary point of x_k
    double Gk = 0.0;
    double G_halfspace = 0.0;
    double abs_error = 0.0;
    /// |G_k| / ((1 + log+|xi_k| + log+|eta_k|)(1 + |xi_k|^2 + |eta_k|^2))
    double growth = 0.0;
};

struct BlowupResult {
    BlowupRegime regime = BlowupRegime::pair_distance;
    std::vector<BlowupStep> steps;
    bool budget_exceeded = false;
    std::string message;
};

inline double blowup_growth_weight(Point2 xi, Point2 eta) {
    const double lx = std::max(0.0, std::log(norm(xi)));
    const double ly = std::max(0.0, std::log(norm(eta)));
    return (1.0 + lx + ly) * (1.0 + dot(xi, xi) + dot(eta, eta));
}

/// Rescaled Green functions G_k at a fixed pair (xi, eta) of the half-plane
/// {xi_1 < 0} attached to boundary point x0 (local frame: first axis along the
/// outward normal). G_Omega comes from the finite-difference solver with the
/// grid refined along with the scale.
inline BlowupResult blowup_sequence(const DomainSpec& domain, Point2 x0, BlowupRegime regime, int steps,
                                    const BlowupOptions& opt = {}) {
    BlowupResult res;
    res.regime = regime;
    if (steps <= 0) return res;
    if (steps < 3) throw std::invalid_argument("blowup_sequence: need at least 3 steps");
    const auto base = domain.project(x0);
    if (base.distance > 1e-9 * domain.diameter())
        throw std::invalid_argument("blowup_sequence: x0 is not on the boundary");
    if (!(opt.xi[0] < 0.0 && opt.eta[0] < 0.0))
        throw std::invalid_argument("blowup_sequence: xi and eta must lie in the open half-plane");
    const double sep = distance(opt.xi, opt.eta);
    if (regime == BlowupRegime::pair_distance && std::abs(sep - 1.0) > 1e-12)
        throw std::invalid_argument("blowup_sequence: regime A needs |xi - eta| = 1");
    if (regime == BlowupRegime::boundary_distance) {
        if (std::abs(norm(opt.xi) - 1.0) > 1e-12 || opt.xi[1] != 0.0)
            throw std::invalid_argument("blowup_sequence: regime B needs xi = (-1, 0)");
        if (!(sep < 0.5) || -opt.eta[0] < 0.5)
            throw std::invalid_argument("blowup_sequence: regime B needs |xi - eta| < 1/2 and d(eta) >= 1/2");
    }

    const Dimension two(2);
    const Point2 nu = base.outward_normal;
    const Point2 tau{-nu[1], nu[0]};
    const auto place = [&](Point2 local, double s) { return x0 + s * (local[0] * nu + local[1] * tau); };
    const double target = halfspace_green(two, opt.xi, opt.eta);

    for (int k = 1; k <= steps; ++k) {
        const double s = opt.scale0 * std::ldexp(1.0, -k);
        BlowupStep st;
        st.k = k;
        st.x = place(opt.xi, s);
        st.y = place(opt.eta, s);
        if (!domain.contains(st.x) || !domain.contains(st.y)) {
            res.message = "step " + std::to_string(k) + ": rescaled pair leaves the domain";
            throw std::invalid_argument("blowup_sequence: " + res.message);
        }
        const auto foot = domain.project(st.x);
        const double r = distance(st.x, st.y);
        st.scale = regime == BlowupRegime::pair_distance ? r : foot.distance;
        st.h = std::min(s / opt.nodes_per_scale, r / 8.0);

        // Estimate the node count from the domain area before building anything.
        const auto& b = domain.bounds();
        const double box_nodes = ((b.hi[0] - b.lo[0]) / st.h + 5.0) * ((b.hi[1] - b.lo[1]) / st.h + 5.0);
        if (box_nodes > 4.0 * static_cast<double>(opt.node_budget)) {
            res.budget_exceeded = true;
            res.message = "step " + std::to_string(k) + " needs more than the node budget";
            break;
        }
        auto mask = std::make_shared<const GridMask>(grid_discretize(domain, st.h));
        st.nodes = mask->inside_count();
        if (st.nodes > opt.node_budget) {
            res.budget_exceeded = true;
            res.message = "step " + std::to_string(k) + " needs " + std::to_string(st.nodes) + " nodes";
            break;
        }
        const BilaplacianSolver solver(assemble_bilaplacian(mask), opt.solve);
        const GridField col = solver.solve(dirac_source(mask, st.y));
        const double G = green_value(col, st.x);

        const Point2 fnu = foot.outward_normal;
        const Point2 ftau{-fnu[1], fnu[0]};
        const auto local = [&](Point2 p) {
            const Point2 v = p - foot.point;
            return Point2{dot(v, fnu) / st.scale, dot(v, ftau) / st.scale};
        };
        st.xi_k = local(st.x);
        st.eta_k = local(st.y);
        st.Gk = G / (st.scale * st.scale); // n = 2: scale^{n-4}
        st.G_halfspace = target;
        st.abs_error = std::abs(st.Gk - target);
        st.growth = std::abs(st.Gk) / blowup_growth_weight(st.xi_k, st.eta_k);
        res.steps.push_back(st);
    }
    return res;
}

struct BlowupVerdict {
    double error_ratio = 0.0;  ///< final-step error / first-step error
    double growth_ratio = 0.0; ///< max growth diagnostic / first-step value
    double min_Gk = 0.0;
    bool pass = true;
};

/// Regime A passes when the final error is at most half the first one;
/// regime B when every G_k stays positive. Both need all requested steps
/// within budget and growth diagnostics within 10x of the first step.
inline BlowupVerdict assess_blowup(const BlowupResult& res, double max_error_ratio = 0.5,
                                   double max_growth_ratio = 10.0) {
    BlowupVerdict v;
    if (res.budget_exceeded) v.pass = false;
    if (res.steps.empty()) return v;
    const auto& first = res.steps.front();
    v.error_ratio = res.steps.back().abs_error / first.abs_error;
    v.min_Gk = std::numeric_limits<double>::infinity();
    for (const auto& s : res.steps) {
        v.growth_ratio = std::max(v.growth_ratio, s.growth / first.growth);
        v.min_Gk = std::min(v.min_Gk, s.Gk);
    }
    if (!(v.growth_ratio <= max_growth_ratio)) v.pass = false;
    if (res.regime == BlowupRegime::pair_distance && !(v.error_ratio <= max_error_ratio)) v.pass = false;
    if (res.regime == BlowupRegime::boundary_distance && !(v.min_Gk > 0.0)) v.pass = false;
    return v;
}

} // namespace biharm
