#pragma once

// Planar test domains (disk, ellipse, limacon, rectangle): inside test,
// boundary distance, grid classification and deterministic pair sampling.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "biharm/error.hpp"
#include "biharm/random.hpp"

namespace biharm {

using Point2 = std::array<double, 2>;

inline Point2 operator+(Point2 a, Point2 b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Point2 operator*(double s, Point2 a) { return {s * a[0], s * a[1]}; }
inline double dot(Point2 a, Point2 b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm(Point2 a) { return std::hypot(a[0], a[1]); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

enum class DomainKind { disk, ellipse, limacon, rectangle };

struct BoundingBox {
    Point2 lo;
    Point2 hi;
};

/// Closest boundary point of a query point.
struct BoundaryProjection {
    Point2 point;
    Point2 outward_normal;
    double distance;
};

namespace detail {

inline double parse_positive(std::string_view s, std::string_view what) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
        throw std::invalid_argument("cannot parse " + std::string(what) + " from '" + std::string(s) + "'");
    return v;
}

inline std::string shortest(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

// Parameterized smooth boundary curve with first and second derivatives.
struct CurveJet {
    Point2 p, dp, ddp;
};

} // namespace detail

/// A bounded planar domain. Disk and ellipse are centred at `anchor`, the
/// limacon rho = a + b cos(theta) has its pole at `anchor`, and the rectangle
/// is [0,w] x [0,h] shifted by `anchor`.
class DomainSpec {
public:
    static DomainSpec disk(double R, Point2 center = {0.0, 0.0}) {
        if (!(R > 0.0)) throw std::invalid_argument("disk radius must be > 0");
        return DomainSpec(DomainKind::disk, R, R, center);
    }
    static DomainSpec ellipse(double a, double b, Point2 center = {0.0, 0.0}) {
        if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("ellipse semi-axes must be > 0");
        return DomainSpec(DomainKind::ellipse, a, b, center);
    }
    static DomainSpec limacon(double a, double b, Point2 pole = {0.0, 0.0}) {
        // a >= 2b keeps the curve convex and free of self-intersection.
        if (!(b > 0.0 && a >= 2.0 * b)) throw std::invalid_argument("limacon requires a >= 2b > 0");
        return DomainSpec(DomainKind::limacon, a, b, pole);
    }
    static DomainSpec rectangle(double w, double h, Point2 corner = {0.0, 0.0}) {
        if (!(w > 0.0 && h > 0.0)) throw std::invalid_argument("rectangle sides must be > 0");
        return DomainSpec(DomainKind::rectangle, w, h, corner);
    }

    /// Parses `disk:R`, `ellipse:a,b`, `limacon:a,b` or `rect:w,h`.
    static DomainSpec parse(std::string_view text) {
        const auto colon = text.find(':');
        if (colon == std::string_view::npos) throw std::invalid_argument("domain '" + std::string(text) + "' lacks ':'");
        const auto kind = text.substr(0, colon);
        const auto args = text.substr(colon + 1);
        const auto comma = args.find(',');
        if (kind == "disk") {
            if (comma != std::string_view::npos) throw std::invalid_argument("disk takes one parameter");
            return disk(detail::parse_positive(args, "disk radius"));
        }
        if (comma == std::string_view::npos)
            throw std::invalid_argument("domain '" + std::string(text) + "' needs two parameters");
        const double p = detail::parse_positive(args.substr(0, comma), "first parameter");
        const double q = detail::parse_positive(args.substr(comma + 1), "second parameter");
        if (kind == "ellipse") return ellipse(p, q);
        if (kind == "limacon") return limacon(p, q);
        if (kind == "rect") return rectangle(p, q);
        throw std::invalid_argument("unknown domain kind '" + std::string(kind) + "'");
    }

    DomainKind kind() const noexcept { return kind_; }
    double p() const noexcept { return p_; }
    double q() const noexcept { return q_; }
    Point2 anchor() const noexcept { return anchor_; }
    double diameter() const noexcept { return diameter_; }
    const BoundingBox& bounds() const noexcept { return bounds_; }

    /// False for the rectangle, whose corners break boundary smoothness.
    bool smooth_boundary() const noexcept { return kind_ != DomainKind::rectangle; }

    std::string tag() const {
        switch (kind_) {
        case DomainKind::disk: return "disk:" + detail::shortest(p_);
        case DomainKind::ellipse: return "ellipse:" + detail::shortest(p_) + "," + detail::shortest(q_);
        case DomainKind::limacon: return "limacon:" + detail::shortest(p_) + "," + detail::shortest(q_);
        case DomainKind::rectangle: return "rect:" + detail::shortest(p_) + "," + detail::shortest(q_);
        }
        return {};
    }

    /// Strict inside test.
    bool contains(Point2 x) const {
        const Point2 z = x - anchor_;
        switch (kind_) {
        case DomainKind::disk: return dot(z, z) < p_ * p_;
        case DomainKind::ellipse: {
            const double u = z[0] / p_, v = z[1] / q_;
            return u * u + v * v < 1.0;
        }
        case DomainKind::limacon: {
            const double rho = norm(z);
            if (rho == 0.0) return true;
            return rho < p_ + q_ * z[0] / rho;
        }
        case DomainKind::rectangle: return z[0] > 0.0 && z[0] < p_ && z[1] > 0.0 && z[1] < q_;
        }
        return false;
    }

    /// Point of the boundary curve at parameter theta (counter-clockwise).
    /// Not available for the rectangle.
    Point2 boundary_point(double theta) const { return anchor_ + jet(theta).p; }

    /// d(x): distance to the boundary, for points on either side.
    double distance_to_boundary(Point2 x) const { return project(x).distance; }

    BoundaryProjection project(Point2 x) const {
        switch (kind_) {
        case DomainKind::disk: return project_disk(x);
        case DomainKind::rectangle: return project_rectangle(x);
        default: return project_iterative(x);
        }
    }

    /// Projection by the boundary parameter: a dense scan brackets every local
    /// minimum of |p(theta) - x|, Brent's method refines each bracket and a few
    /// guarded Newton steps polish the winner. For the disk this bypasses the
    /// closed form and is used to cross-check it.
    BoundaryProjection project_iterative(Point2 x) const {
        if (kind_ == DomainKind::rectangle)
            throw std::logic_error("rectangle boundary has no smooth parameterization");
        const Point2 z = x - anchor_;
        constexpr int kScan = 512;
        constexpr double step = 2.0 * std::numbers::pi / kScan;
        const auto sq = [&](double t) {
            const Point2 o = jet(t).p - z;
            return dot(o, o);
        };
        std::array<double, kScan> f;
        for (int i = 0; i < kScan; ++i) f[i] = sq(i * step);

        double best = std::numeric_limits<double>::infinity(), best_theta = 0.0;
        for (int i = 0; i < kScan; ++i) {
            const double prev = f[(i + kScan - 1) % kScan], next = f[(i + 1) % kScan];
            if (!(f[i] <= prev && f[i] <= next)) continue;
            const double lo = (i - 1) * step, hi = (i + 1) * step;
            auto [t, v] = boost::math::tools::brent_find_minima(sq, lo, hi, std::numeric_limits<double>::digits / 2);
            for (int it = 0; it < 4; ++it) {
                const auto j = jet(t);
                const Point2 o = j.p - z;
                const double curv = dot(j.ddp, o) + dot(j.dp, j.dp);
                if (!(curv > 0.0)) break;
                const double tn = t - dot(j.dp, o) / curv;
                if (!(tn > lo && tn < hi)) break;
                const double vn = sq(tn);
                if (!(vn < v)) break;
                t = tn;
                v = vn;
            }
            if (v < best) {
                best = v;
                best_theta = t;
            }
        }
        if (!std::isfinite(best)) throw NumericalError("boundary projection failed", best);
        const auto j = jet(best_theta);
        const double speed = norm(j.dp);
        return {anchor_ + j.p, {j.dp[1] / speed, -j.dp[0] / speed}, std::sqrt(best)};
    }

private:
    DomainSpec(DomainKind kind, double p, double q, Point2 anchor) : kind_(kind), p_(p), q_(q), anchor_(anchor) {
        compute_extent();
    }

    detail::CurveJet jet(double t) const {
        const double c = std::cos(t), s = std::sin(t);
        switch (kind_) {
        case DomainKind::disk: return {{p_ * c, p_ * s}, {-p_ * s, p_ * c}, {-p_ * c, -p_ * s}};
        case DomainKind::ellipse: return {{p_ * c, q_ * s}, {-p_ * s, q_ * c}, {-p_ * c, -q_ * s}};
        case DomainKind::limacon: {
            const double rho = p_ + q_ * c, drho = -q_ * s, ddrho = -q_ * c;
            return {{rho * c, rho * s},
                    {drho * c - rho * s, drho * s + rho * c},
                    {ddrho * c - 2.0 * drho * s - rho * c, ddrho * s + 2.0 * drho * c - rho * s}};
        }
        case DomainKind::rectangle: break;
        }
        throw std::logic_error("rectangle boundary has no smooth parameterization");
    }

    BoundaryProjection project_disk(Point2 x) const {
        const Point2 z = x - anchor_;
        const double rho = norm(z);
        const Point2 n = rho > 0.0 ? Point2{z[0] / rho, z[1] / rho} : Point2{1.0, 0.0};
        return {anchor_ + p_ * n, n, std::abs(p_ - rho)};
    }

    BoundaryProjection project_rectangle(Point2 x) const {
        const Point2 z = x - anchor_;
        if (contains(x)) {
            const std::array<double, 4> gaps{z[0], p_ - z[0], z[1], q_ - z[1]};
            const auto k = static_cast<int>(std::min_element(gaps.begin(), gaps.end()) - gaps.begin());
            static constexpr std::array<Point2, 4> normals{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};
            return {x + gaps[k] * normals[k], normals[k], gaps[k]};
        }
        const Point2 c{std::clamp(z[0], 0.0, p_), std::clamp(z[1], 0.0, q_)};
        const Point2 off = z - c;
        const double d = norm(off);
        Point2 n{0.0, 0.0};
        if (d > 0.0) {
            n = {off[0] / d, off[1] / d};
        } else {
            // On an edge: pick the nearest side's normal.
            const std::array<double, 4> gaps{z[0], p_ - z[0], z[1], q_ - z[1]};
            static constexpr std::array<Point2, 4> normals{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};
            n = normals[std::min_element(gaps.begin(), gaps.end()) - gaps.begin()];
        }
        return {anchor_ + c, n, d};
    }

    void compute_extent() {
        switch (kind_) {
        case DomainKind::disk:
            diameter_ = 2.0 * p_;
            bounds_ = {anchor_ - Point2{p_, p_}, anchor_ + Point2{p_, p_}};
            return;
        case DomainKind::ellipse:
            diameter_ = 2.0 * std::max(p_, q_);
            bounds_ = {anchor_ - Point2{p_, q_}, anchor_ + Point2{p_, q_}};
            return;
        case DomainKind::rectangle:
            diameter_ = std::hypot(p_, q_);
            bounds_ = {anchor_, anchor_ + Point2{p_, q_}};
            return;
        case DomainKind::limacon: {
            constexpr int m = 2048;
            std::vector<Point2> pts(m);
            Point2 lo{1e300, 1e300}, hi{-1e300, -1e300};
            for (int i = 0; i < m; ++i) {
                pts[i] = jet(2.0 * std::numbers::pi * i / m).p;
                lo = {std::min(lo[0], pts[i][0]), std::min(lo[1], pts[i][1])};
                hi = {std::max(hi[0], pts[i][0]), std::max(hi[1], pts[i][1])};
            }
            double diam = 0.0;
            int bi = 0, bj = 0;
            for (int i = 0; i < m; ++i)
                for (int j = i + 1; j < m; ++j)
                    if (const double d = distance(pts[i], pts[j]); d > diam) {
                        diam = d;
                        bi = i;
                        bj = j;
                    }
            // Alternating Brent maximization around the best sampled chord.
            const double step = 2.0 * std::numbers::pi / m;
            double t1 = bi * step, t2 = bj * step;
            for (int round = 0; round < 6; ++round) {
                const auto far_from = [&](double fixed) {
                    return [&, fixed](double t) { return -distance(jet(t).p, jet(fixed).p); };
                };
                t1 = boost::math::tools::brent_find_minima(far_from(t2), t1 - step, t1 + step,
                                                           std::numeric_limits<double>::digits / 2).first;
                t2 = boost::math::tools::brent_find_minima(far_from(t1), t2 - step, t2 + step,
                                                           std::numeric_limits<double>::digits / 2).first;
            }
            diameter_ = std::max(diam, distance(jet(t1).p, jet(t2).p));
            const double pad = 1e-3 * diam;
            bounds_ = {anchor_ + lo - Point2{pad, pad}, anchor_ + hi + Point2{pad, pad}};
            return;
        }
        }
    }

    DomainKind kind_;
    double p_, q_;
    Point2 anchor_;
    double diameter_ = 0.0;
    BoundingBox bounds_{};
};

inline double distance_to_boundary(const DomainSpec& domain, Point2 x) { return domain.distance_to_boundary(x); }

// ---------------------------------------------------------------------------
// Grid classification

enum class NodeKind : std::uint8_t {
    exterior,          ///< not strictly inside the domain
    boundary_adjacent, ///< inside, but the 13-point stencil reaches an exterior node
    interior           ///< inside with the full stencil inside
};

/// Uniform grid over the domain's bounding box (plus a two-node margin), with
/// nodes at anchor + h (i, j) for integers i, j. Inside nodes (interior and
/// boundary-adjacent) carry the unknowns of the discrete problem.
class GridMask {
public:
    double h() const noexcept { return h_; }
    int nx() const noexcept { return nx_; }
    int ny() const noexcept { return ny_; }
    Point2 origin() const noexcept { return node(0, 0); }

    Point2 node(int i, int j) const noexcept {
        return {anchor_[0] + (i0_ + i) * h_, anchor_[1] + (j0_ + j) * h_};
    }
    bool in_grid(int i, int j) const noexcept { return i >= 0 && j >= 0 && i < nx_ && j < ny_; }
    NodeKind kind(int i, int j) const noexcept {
        return in_grid(i, j) ? kinds_[flat(i, j)] : NodeKind::exterior;
    }
    /// Unknown index of node (i, j), or -1 for exterior nodes and nodes off the grid.
    int unknown(int i, int j) const noexcept { return in_grid(i, j) ? unknowns_[flat(i, j)] : -1; }

    /// Number of strictly inside nodes (the discrete unknowns).
    int inside_count() const noexcept { return static_cast<int>(inside_nodes_.size()); }
    int count(NodeKind k) const noexcept {
        return static_cast<int>(std::count(kinds_.begin(), kinds_.end(), k));
    }
    /// (i, j) of unknown number u.
    std::array<int, 2> inside_node(int u) const noexcept { return inside_nodes_[u]; }

    /// Grid coordinates of a point: x = node(0,0) + h (gi, gj).
    std::array<double, 2> grid_coords(Point2 x) const noexcept {
        return {(x[0] - anchor_[0]) / h_ - i0_, (x[1] - anchor_[1]) / h_ - j0_};
    }

    friend GridMask grid_discretize(const DomainSpec& domain, double h, int min_inside);

private:
    std::size_t flat(int i, int j) const noexcept { return static_cast<std::size_t>(j) * nx_ + i; }

    double h_ = 0.0;
    Point2 anchor_{};
    long i0_ = 0, j0_ = 0;
    int nx_ = 0, ny_ = 0;
    std::vector<NodeKind> kinds_;
    std::vector<int> unknowns_;
    std::vector<std::array<int, 2>> inside_nodes_;
};

/// Classifies every node of the bounding grid. Rejects grids with fewer than
/// `min_inside` inside nodes.
inline GridMask grid_discretize(const DomainSpec& domain, double h, int min_inside = 25) {
    if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("grid spacing must be > 0");
    GridMask m;
    m.h_ = h;
    m.anchor_ = domain.anchor();
    const auto& b = domain.bounds();
    m.i0_ = static_cast<long>(std::floor((b.lo[0] - m.anchor_[0]) / h)) - 2;
    m.j0_ = static_cast<long>(std::floor((b.lo[1] - m.anchor_[1]) / h)) - 2;
    const long i1 = static_cast<long>(std::ceil((b.hi[0] - m.anchor_[0]) / h)) + 2;
    const long j1 = static_cast<long>(std::ceil((b.hi[1] - m.anchor_[1]) / h)) + 2;
    const long nx = i1 - m.i0_ + 1, ny = j1 - m.j0_ + 1;
    if (nx * ny > 400'000'000L) throw std::invalid_argument("grid too fine: " + std::to_string(nx * ny) + " nodes");
    m.nx_ = static_cast<int>(nx);
    m.ny_ = static_cast<int>(ny);

    std::vector<char> inside(static_cast<std::size_t>(nx * ny), 0);
    for (int j = 0; j < m.ny_; ++j)
        for (int i = 0; i < m.nx_; ++i) inside[m.flat(i, j)] = domain.contains(m.node(i, j)) ? 1 : 0;

    const auto is_in = [&](int i, int j) { return m.in_grid(i, j) && inside[m.flat(i, j)]; };
    m.kinds_.assign(inside.size(), NodeKind::exterior);
    m.unknowns_.assign(inside.size(), -1);
    for (int j = 0; j < m.ny_; ++j) {
        for (int i = 0; i < m.nx_; ++i) {
            if (!inside[m.flat(i, j)]) continue;
            bool full = true;
            for (int dj = -2; dj <= 2 && full; ++dj)
                for (int di = -2; di <= 2; ++di)
                    if (std::abs(di) + std::abs(dj) <= 2 && !is_in(i + di, j + dj)) {
                        full = false;
                        break;
                    }
            m.kinds_[m.flat(i, j)] = full ? NodeKind::interior : NodeKind::boundary_adjacent;
            m.unknowns_[m.flat(i, j)] = static_cast<int>(m.inside_nodes_.size());
            m.inside_nodes_.push_back({i, j});
        }
    }
    if (m.inside_count() < std::max(1, min_inside))
        throw std::invalid_argument("grid too coarse: " + std::to_string(m.inside_count()) +
                                    " inside nodes (need " + std::to_string(std::max(1, min_inside)) + ")");
    return m;
}

// ---------------------------------------------------------------------------
// Pair sampling

/// A pair of strictly interior points with cached d(x), d(y) and |x - y|.
struct PointPair {
    Point2 x;
    Point2 y;
    double dx;
    double dy;
    double r;
};

enum class SamplingStrategy { uniform, boundary_stratified, near_diagonal };

inline SamplingStrategy parse_strategy(std::string_view s) {
    if (s == "uniform") return SamplingStrategy::uniform;
    if (s == "boundary-stratified") return SamplingStrategy::boundary_stratified;
    if (s == "near-diagonal") return SamplingStrategy::near_diagonal;
    throw std::invalid_argument("unknown sampling strategy '" + std::string(s) + "'");
}

inline const char* to_string(SamplingStrategy s) {
    switch (s) {
    case SamplingStrategy::uniform: return "uniform";
    case SamplingStrategy::boundary_stratified: return "boundary-stratified";
    case SamplingStrategy::near_diagonal: return "near-diagonal";
    }
    return "?";
}

/// Regimes of the two-case split of H: d(x)d(y) <= r^2 (far), > r^2 (near),
/// and a band 1/2 <= d(x)d(y)/r^2 <= 2 straddling the case boundary.
enum class PairRegime { far, near, mixed };

struct SamplingOptions {
    SamplingStrategy strategy = SamplingStrategy::uniform;
    /// Consecutive blocks of this many pairs share the same y (the solver then
    /// needs one Green column per block).
    int pairs_per_source = 1;
    double min_boundary_distance = 0.0;
    double min_pair_distance = 0.0;
};

namespace detail {

inline constexpr int kMaxDraws = 200000;

inline double min_pair_distance(const DomainSpec& dom, const SamplingOptions& opt) {
    return std::max(opt.min_pair_distance, 1e-4 * dom.diameter());
}

inline Point2 draw_inside(const DomainSpec& dom, CounterRng& rng, double dmin) {
    const auto& b = dom.bounds();
    for (int k = 0; k < kMaxDraws; ++k) {
        const Point2 p{rng.uniform(b.lo[0], b.hi[0]), rng.uniform(b.lo[1], b.hi[1])};
        if (dom.contains(p) && (dmin <= 0.0 || dom.distance_to_boundary(p) >= dmin)) return p;
    }
    throw std::invalid_argument("sampling: no interior point with the requested boundary distance");
}

inline bool regime_matches(PairRegime g, double D, double r) {
    const double q = D / (r * r);
    switch (g) {
    case PairRegime::far: return q <= 1.0;
    case PairRegime::near: return q > 1.0;
    case PairRegime::mixed: return q >= 0.5 && q <= 2.0;
    }
    return false;
}

// Draws x around a fixed y; returns false if the budget is exhausted.
inline bool draw_partner(const DomainSpec& dom, CounterRng& rng, Point2 y, double dy, SamplingStrategy strategy,
                         PairRegime regime, const SamplingOptions& opt, PointPair& out) {
    const double dmin = opt.min_boundary_distance;
    const double rmin = min_pair_distance(dom, opt);
    for (int k = 0; k < 20000; ++k) {
        Point2 x;
        double r = 0.0;
        if (strategy == SamplingStrategy::uniform) {
            x = draw_inside(dom, rng, dmin);
            r = distance(x, y);
        } else {
            double lo = rmin, hi = dom.diameter();
            if (strategy == SamplingStrategy::near_diagonal) {
                hi = dy / 3.0;
            } else if (regime == PairRegime::near) {
                hi = std::min(hi, 2.0 * dy);
            } else if (regime == PairRegime::mixed) {
                lo = std::max(lo, 0.25 * dy);
                hi = std::min(hi, 4.0 * dy);
            }
            if (!(hi > lo)) return false;
            r = lo * std::exp(rng.uniform() * std::log(hi / lo));
            const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
            x = y + r * Point2{std::cos(phi), std::sin(phi)};
            if (!dom.contains(x)) continue;
        }
        if (r < rmin) continue;
        const double dx = dom.distance_to_boundary(x);
        if (dx <= 0.0 || dx < dmin) continue;
        if (strategy == SamplingStrategy::near_diagonal) {
            if (r > 0.5 * std::min(dx, dy)) continue;
        } else if (strategy == SamplingStrategy::boundary_stratified) {
            if (!regime_matches(regime, dx * dy, r)) continue;
        }
        out = {x, y, dx, dy, distance(x, y)};
        return true;
    }
    return false;
}

} // namespace detail

/// Deterministic pair sampler. Pair i depends only on (seed, i, options).
/// boundary-stratified cycles through the far/near/mixed regimes; near-diagonal
/// enforces r <= min(d(x), d(y)) / 2.
inline std::vector<PointPair> sample_pairs(const DomainSpec& dom, int count, std::uint64_t seed,
                                           const SamplingOptions& opt = {}) {
    if (count < 1) throw std::invalid_argument("sample_pairs: count must be >= 1");
    if (opt.pairs_per_source < 1) throw std::invalid_argument("sample_pairs: pairs_per_source must be >= 1");
    std::vector<PointPair> out;
    out.reserve(static_cast<std::size_t>(count));

    const double dmin = opt.min_boundary_distance;
    const double rmin = detail::min_pair_distance(dom, opt);
    // Sources shared by several partners keep room for every regime.
    const double source_dmin = opt.strategy == SamplingStrategy::uniform
                                   ? dmin
                                   : std::max(dmin, 4.0 * std::max(rmin, dmin));

    const int per = opt.pairs_per_source;
    for (int block = 0; block * per < count; ++block) {
        Point2 y{};
        double dy = 0.0;
        int attempt = 0;
        for (;; ++attempt) {
            CounterRng src(seed, (static_cast<std::uint64_t>(block) << 20) + attempt);
            y = detail::draw_inside(dom, src, source_dmin);
            dy = dom.distance_to_boundary(y);
            // Near-diagonal partners need r >= rmin with r <= d/3.
            if (opt.strategy != SamplingStrategy::near_diagonal || dy > 4.0 * rmin) break;
            if (attempt > 1000) throw std::invalid_argument("sample_pairs: no admissible source point");
        }
        const int end = std::min(count, (block + 1) * per);
        for (int i = block * per; i < end; ++i) {
            const auto regime = static_cast<PairRegime>(i % 3);
            PointPair pp{};
            bool ok = false;
            for (int retry = 0; retry < 8 && !ok; ++retry) {
                CounterRng rng(seed ^ 0x5bd1e995ULL, (static_cast<std::uint64_t>(i) << 8) + retry);
                ok = detail::draw_partner(dom, rng, y, dy, opt.strategy, regime, opt, pp);
            }
            if (!ok) throw NumericalError("sample_pairs: could not draw pair " + std::to_string(i));
            out.push_back(pp);
        }
    }
    return out;
}

inline std::vector<PointPair> sample_pairs(const DomainSpec& dom, int count, std::uint64_t seed,
                                           SamplingStrategy strategy) {
    SamplingOptions opt;
    opt.strategy = strategy;
    return sample_pairs(dom, count, seed, opt);
}

} // namespace biharm
