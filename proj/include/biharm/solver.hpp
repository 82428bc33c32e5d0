#pragma once

// Finite-difference clamped-plate solver: 13-point bilaplacian on a grid mask,
// discrete Green columns and grid-convergence studies.

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#if defined(BIHARM_HAVE_CHOLMOD)
#include <Eigen/CholmodSupport>
#endif

#include "biharm/error.hpp"
#include "biharm/geometry.hpp"
#include "biharm/kernels.hpp"

namespace biharm {

using SparseMatrix = Eigen::SparseMatrix<double>;

#if defined(BIHARM_HAVE_CHOLMOD)
using DirectFactorization = Eigen::CholmodSupernodalLLT<SparseMatrix>;
#else
using DirectFactorization = Eigen::SimplicialLDLT<SparseMatrix>;
#endif

/// Discrete bilaplacian restricted to the inside nodes of a mask.
struct GridOperator {
    std::shared_ptr<const GridMask> mask;
    SparseMatrix matrix;
    double h = 0.0;
};

/// Values on the inside nodes of a mask, zero elsewhere.
struct GridField {
    std::shared_ptr<const GridMask> mask;
    Eigen::VectorXd values;
    std::string source;
};

/// 13-point stencil 20 / -8 / 2 / 1 scaled by 1/h^4. Exterior nodes carry
/// u = 0; when the edge neighbour i+e is exterior, the node i+2e behind it is a
/// ghost mirroring u_i (zero normal derivative across the boundary node), which
/// adds 1 to the diagonal. The result is symmetric positive definite.
inline GridOperator assemble_bilaplacian(std::shared_ptr<const GridMask> mask) {
    if (!mask) throw std::invalid_argument("assemble_bilaplacian: null mask");
    const GridMask& m = *mask;
    const int n = m.inside_count();
    const double s = 1.0 / std::pow(m.h(), 4);

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(n) * 13);
    static constexpr int axis[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    static constexpr int diag[4][2] = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};

    for (int u = 0; u < n; ++u) {
        const auto [i, j] = m.inside_node(u);
        double centre = 20.0;
        int inside_edges = 0;
        for (const auto& e : axis) {
            const int v1 = m.unknown(i + e[0], j + e[1]);
            if (v1 < 0) {
                centre += 1.0;
                continue;
            }
            ++inside_edges;
            trips.emplace_back(u, v1, -8.0 * s);
            const int v2 = m.unknown(i + 2 * e[0], j + 2 * e[1]);
            if (v2 >= 0) trips.emplace_back(u, v2, s);
        }
        if (inside_edges == 0)
            throw std::invalid_argument("assemble_bilaplacian: isolated inside node at (" + std::to_string(i) + "," +
                                        std::to_string(j) + ")");
        for (const auto& e : diag) {
            const int v = m.unknown(i + e[0], j + e[1]);
            if (v >= 0) trips.emplace_back(u, v, 2.0 * s);
        }
        trips.emplace_back(u, u, centre * s);
    }
    GridOperator op{std::move(mask), SparseMatrix(n, n), m.h()};
    op.matrix.setFromTriplets(trips.begin(), trips.end());
    op.matrix.makeCompressed();
    return op;
}

enum class SolveMethod { automatic, direct, iterative };

struct SolveOptions {
    double tol = 1e-10;
    SolveMethod method = SolveMethod::automatic;
    /// automatic picks the sparse Cholesky factorization up to this many unknowns.
    int direct_limit = 400'000;
    int max_iterations = 500'000;
};

/// Factorizes (or prepares) the operator once; solve() is const and may be
/// called concurrently with distinct right-hand sides.
class BilaplacianSolver {
public:
    explicit BilaplacianSolver(GridOperator op, SolveOptions opt = {}) : op_(std::move(op)), opt_(opt) {
        if (!(opt_.tol > 0.0)) throw std::invalid_argument("solve tolerance must be > 0");
        for (int k = 0; k < op_.matrix.outerSize(); ++k) {
            double row = 0.0;
            for (SparseMatrix::InnerIterator it(op_.matrix, k); it; ++it) row += std::abs(it.value());
            norm_inf_ = std::max(norm_inf_, row); // symmetric: column sums equal row sums
        }
        method_ = opt_.method;
        if (method_ == SolveMethod::automatic)
            method_ = op_.matrix.rows() <= opt_.direct_limit ? SolveMethod::direct : SolveMethod::iterative;
        if (method_ == SolveMethod::direct) {
            factor_ = std::make_unique<DirectFactorization>(op_.matrix);
            if (factor_->info() != Eigen::Success)
                throw NumericalError("sparse Cholesky factorization failed (operator not positive definite?)");
        } else {
            cg_ = std::make_unique<Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper>>(op_.matrix);
            cg_->setTolerance(opt_.tol);
            cg_->setMaxIterations(opt_.max_iterations);
        }
    }

    const GridOperator& op() const noexcept { return op_; }
    SolveMethod method() const noexcept { return method_; }
    double tolerance() const noexcept { return opt_.tol; }

    /// Solves A x = b. Acceptance uses the normwise backward error
    /// |b - A x| / (|A| |x| + |b|) <= tol (infinity norms): for a discrete Dirac
    /// the plain relative residual |b - A x| / |b| has a rounding floor of
    /// roughly eps |A| |x| / |b|, which exceeds 1e-10 once h <= 1/32.
    Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
        if (b.size() != op_.matrix.rows()) throw std::invalid_argument("right-hand side has the wrong size");
        if (b.isZero(0.0)) return Eigen::VectorXd::Zero(b.size());
        Eigen::VectorXd x;
        if (method_ == SolveMethod::direct) {
            x = direct_solve(b);
            for (int k = 0; k < 2 && backward_error(b, x) > opt_.tol; ++k) x += direct_solve(b - op_.matrix * x);
        } else {
            x = cg_->solve(b);
        }
        const double err = backward_error(b, x);
        if (!(err <= opt_.tol))
            throw NumericalError("linear solve reached backward error " + detail::sci(err), err);
        return x;
    }

    /// |b - A x|_inf / (|A|_inf |x|_inf + |b|_inf).
    double backward_error(const Eigen::VectorXd& b, const Eigen::VectorXd& x) const {
        const double r = (b - op_.matrix * x).lpNorm<Eigen::Infinity>();
        return r / (norm_inf_ * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>());
    }

    /// |b - A x|_2 / |b|_2, reported alongside the backward error.
    double relative_residual(const Eigen::VectorXd& b, const Eigen::VectorXd& x) const {
        return (b - op_.matrix * x).norm() / b.norm();
    }

    GridField solve(const GridField& rhs) const {
        if (rhs.mask != op_.mask && (!rhs.mask || rhs.mask.get() != op_.mask.get()))
            throw std::invalid_argument("right-hand side lives on a different mask");
        return {op_.mask, solve(rhs.values), "solve(" + rhs.source + ")"};
    }

private:
    Eigen::VectorXd direct_solve(const Eigen::VectorXd& b) const {
        // CHOLMOD keeps scratch space in its common block.
        std::lock_guard<std::mutex> lock(*factor_mutex_);
        return factor_->solve(b);
    }

    GridOperator op_;
    SolveOptions opt_;
    SolveMethod method_ = SolveMethod::direct;
    double norm_inf_ = 0.0;
    std::unique_ptr<DirectFactorization> factor_;
    std::unique_ptr<std::mutex> factor_mutex_ = std::make_unique<std::mutex>();
    std::unique_ptr<Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper>> cg_;
};

/// One-shot solve of A u = b to relative residual tol.
inline GridField solve(const GridOperator& op, const GridField& rhs, double tol = 1e-10) {
    SolveOptions opt;
    opt.tol = tol;
    return BilaplacianSolver(op, opt).solve(rhs);
}

namespace detail {

struct BilinearStencil {
    int i, j;     // lower-left node
    double fx, fy; // offsets in [0, 1)
};

inline BilinearStencil locate(const GridMask& m, Point2 x) {
    const auto g = m.grid_coords(x);
    const double fi = std::floor(g[0]), fj = std::floor(g[1]);
    const int i = static_cast<int>(fi), j = static_cast<int>(fj);
    if (!(i >= 0 && j >= 0 && i + 1 < m.nx() && j + 1 < m.ny()))
        throw std::domain_error("point lies outside the grid");
    return {i, j, g[0] - fi, g[1] - fj};
}

template <class F>
void for_each_corner(const BilinearStencil& s, F&& f) {
    f(s.i, s.j, (1.0 - s.fx) * (1.0 - s.fy));
    f(s.i + 1, s.j, s.fx * (1.0 - s.fy));
    f(s.i, s.j + 1, (1.0 - s.fx) * s.fy);
    f(s.i + 1, s.j + 1, s.fx * s.fy);
}

} // namespace detail

/// Bilinear interpolation of a field, with zero outside the inside nodes.
inline double green_value(const GridField& field, Point2 x) {
    const GridMask& m = *field.mask;
    const auto st = detail::locate(m, x);
    double v = 0.0;
    detail::for_each_corner(st, [&](int i, int j, double w) {
        const int u = m.unknown(i, j);
        if (u >= 0 && w != 0.0) v += w * field.values[u];
    });
    return v;
}

/// Discrete Dirac at y: mass 1/h^2 spread over the four surrounding nodes with
/// bilinear weights (a single node value when y is a node). Because this is the
/// transpose of green_value, G_h(x, y) = G_h(y, x) holds algebraically.
inline GridField dirac_source(std::shared_ptr<const GridMask> mask, Point2 y) {
    const GridMask& m = *mask;
    GridField f{mask, Eigen::VectorXd::Zero(m.inside_count()), "dirac"};
    const double s = 1.0 / (m.h() * m.h());
    const auto st = detail::locate(m, y);
    detail::for_each_corner(st, [&](int i, int j, double w) {
        const int u = m.unknown(i, j);
        if (u >= 0 && w != 0.0) f.values[u] += w * s;
    });
    return f;
}

/// Discrete Green function of a domain at fixed spacing; caches the
/// factorization and hands out columns G_h(., y).
class DiscreteGreen {
public:
    DiscreteGreen(const DomainSpec& domain, double h, SolveOptions opt = {})
        : domain_(domain),
          mask_(std::make_shared<const GridMask>(grid_discretize(domain, h))),
          solver_(assemble_bilaplacian(mask_), opt) {}

    const DomainSpec& domain() const noexcept { return domain_; }
    const GridMask& mask() const noexcept { return *mask_; }
    const BilaplacianSolver& solver() const noexcept { return solver_; }
    double h() const noexcept { return mask_->h(); }

    /// Column G_h(., y); requires d(y) >= 2h.
    GridField column(Point2 y) const {
        const double dy = domain_.distance_to_boundary(y);
        if (!domain_.contains(y) || dy < 2.0 * h())
            throw std::domain_error("source point too close to the boundary (d = " + std::to_string(dy) +
                                    ", need >= 2h = " + std::to_string(2.0 * h()) + ")");
        GridField f = solver_.solve(dirac_source(mask_, y));
        f.source = "green(" + detail::shortest(y[0]) + "," + detail::shortest(y[1]) + ")";
        return f;
    }

    /// G_h(x, y) for a batch of pairs. Pairs sharing the same y reuse one
    /// column; evaluation points must keep d >= 2h and r >= 2h.
    std::vector<double> evaluate(const std::vector<PointPair>& pairs) const {
        std::vector<double> out(pairs.size());
        std::map<Point2, std::vector<std::size_t>> by_source;
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            const auto& p = pairs[k];
            if (p.dx < 2.0 * h() || p.r < 2.0 * h())
                throw std::domain_error("evaluation pair closer than 2h to the boundary or to its source");
            by_source[p.y].push_back(k);
        }
        for (const auto& [y, idx] : by_source) {
            const GridField col = column(y);
            for (std::size_t k : idx) out[k] = green_value(col, pairs[k].x);
        }
        return out;
    }

private:
    DomainSpec domain_;
    std::shared_ptr<const GridMask> mask_;
    BilaplacianSolver solver_;
};

/// Green column for a single source point.
inline GridField discrete_green(const DomainSpec& domain, double h, Point2 y, double tol = 1e-10) {
    SolveOptions opt;
    opt.tol = tol;
    return DiscreteGreen(domain, h, opt).column(y);
}

// ---------------------------------------------------------------------------
// Convergence studies

struct ConvergenceRow {
    double h;
    /// Oracle mode: max relative error against the exact kernel. Richardson
    /// mode: max relative change from the previous (coarser) grid.
    double max_rel_error;
    /// log(e_prev / e) / log(h_prev / h); NaN on rows without a predecessor.
    double order;
    /// e / e_prev; NaN on rows without a predecessor.
    double ratio;
};

struct ConvergenceTable {
    bool oracle = false;
    std::vector<ConvergenceRow> rows;
};

/// Exact disk Green function for a pair, in domain coordinates.
inline double disk_green_exact(const DomainSpec& disk, Point2 x, Point2 y) {
    if (disk.kind() != DomainKind::disk) throw std::invalid_argument("exact Green function needs a disk");
    const Point2 a = x - disk.anchor(), b = y - disk.anchor();
    return ball_green(Dimension(2), a, b, disk.p());
}

/// Oracle mode on the disk, Richardson (successive-grid) mode elsewhere.
inline ConvergenceTable convergence_study(const DomainSpec& domain, const std::vector<PointPair>& pairs,
                                          const std::vector<double>& h_list, SolveOptions opt = {}) {
    if (pairs.empty()) throw std::invalid_argument("convergence_study: no pairs");
    if (h_list.empty()) throw std::invalid_argument("convergence_study: empty h list");
    for (std::size_t k = 1; k < h_list.size(); ++k)
        if (!(h_list[k] < h_list[k - 1])) throw std::invalid_argument("convergence_study: h list must decrease");

    ConvergenceTable table;
    table.oracle = domain.kind() == DomainKind::disk;
    std::vector<double> exact;
    if (table.oracle)
        for (const auto& p : pairs) exact.push_back(disk_green_exact(domain, p.x, p.y));

    std::vector<double> prev;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (double h : h_list) {
        const DiscreteGreen green(domain, h, opt);
        const auto vals = green.evaluate(pairs);
        ConvergenceRow row{h, nan, nan, nan};
        if (table.oracle) {
            double e = 0.0;
            for (std::size_t k = 0; k < vals.size(); ++k) e = std::max(e, std::abs(vals[k] - exact[k]) / std::abs(exact[k]));
            row.max_rel_error = e;
        } else if (!prev.empty()) {
            double e = 0.0;
            for (std::size_t k = 0; k < vals.size(); ++k)
                e = std::max(e, std::abs(vals[k] - prev[k]) / std::max(std::abs(vals[k]), 1e-300));
            row.max_rel_error = e;
        }
        if (!std::isfinite(row.max_rel_error) && (table.oracle || !prev.empty()))
            throw NumericalError("convergence_study: non-finite error");
        if (!table.rows.empty() && std::isfinite(table.rows.back().max_rel_error) && std::isfinite(row.max_rel_error)) {
            const auto& last = table.rows.back();
            row.ratio = row.max_rel_error / last.max_rel_error;
            row.order = std::log(last.max_rel_error / row.max_rel_error) / std::log(last.h / h);
        }
        table.rows.push_back(row);
        prev = vals;
    }
    return table;
}

struct ConvergenceVerdict {
    /// Oracle mode: log(e_first / e_last) / log(h_first / h_last).
    double overall_order = std::numeric_limits<double>::quiet_NaN();
    bool pass = true;
};

/// Oracle mode: errors decrease on every refinement and the overall order is
/// at least `min_order`. Richardson mode: successive-change ratios <= max_ratio.
inline ConvergenceVerdict assess_convergence(const ConvergenceTable& t, double min_order = 1.0,
                                             double max_ratio = 0.6) {
    ConvergenceVerdict v;
    const auto& rows = t.rows;
    if (t.oracle) {
        if (rows.size() < 2) return v;
        for (std::size_t k = 1; k < rows.size(); ++k)
            if (!(rows[k].max_rel_error < rows[k - 1].max_rel_error)) v.pass = false;
        v.overall_order = std::log(rows.front().max_rel_error / rows.back().max_rel_error) /
                          std::log(rows.front().h / rows.back().h);
        if (!(v.overall_order >= min_order)) v.pass = false;
    } else {
        for (const auto& r : rows)
            if (std::isfinite(r.ratio) && !(r.ratio <= max_ratio)) v.pass = false;
        if (rows.size() >= 3) {
            const auto& a = rows[1];
            const auto& b = rows.back();
            if (a.max_rel_error > 0.0 && b.max_rel_error > 0.0 && &a != &b)
                v.overall_order = std::log(a.max_rel_error / b.max_rel_error) / std::log(a.h / b.h);
        }
    }
    return v;
}

} // namespace biharm
