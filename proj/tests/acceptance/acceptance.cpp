// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "biharm/cli.hpp"

using namespace biharm;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Gauss-Kronrod in s = v - 1: (2s + s^2)(1 + s)^{1-n} has no cancellation near v = 1.
double quad_integral(int n, double A) {
    auto f = [n](double s) { return (2.0 * s + s * s) * std::pow(1.0 + s, 1.0 - n); };
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, A - 1.0, 6, 1e-13, &err);
}

// 1. closed forms vs adaptive quadrature
Outcome kernel_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    CounterRng rng(101, 0);
    double worst = 0.0;
    int bad = 0;
    const int count = 10'000;
    for (int k = 0; k < count; ++k) {
        const int n = 2 + static_cast<int>(rng.uniform() * 9.0);
        // log-uniform shift t = A - 1 so both the series and closed-form branches are exercised
        const double t = std::exp(rng.uniform(std::log(1e-6), std::log(999.0)));
        const double A = 1.0 + t;
        const double e = rel(boggio_integral(Dimension(n), A), quad_integral(n, A));
        worst = std::max(worst, e);
        if (!(e <= 1e-10)) ++bad;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {bad == 0 && secs <= 10.0,
            fmt("%d cases, max rel err %.2e, %d above 1e-10, %.2f s (limit 10 s)", count, worst, bad, secs)};
}

// 2. disk ground truth and convergence order
Outcome disk_ground_truth() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto disk = DomainSpec::disk(1);
    const auto pairs = detail::reference_pairs(disk);
    bool separated = pairs.size() == 5;
    for (const auto& p : pairs) separated = separated && p.dx >= 0.3 && p.dy >= 0.3 && p.r >= 0.3;
    const auto table = convergence_study(disk, pairs, {1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0});
    const auto verdict = assess_convergence(table);
    const double final_err = table.rows.back().max_rel_error;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {separated && table.oracle && final_err <= 0.05 && verdict.pass && secs <= 120.0,
            fmt("max rel err %.3f / %.3f / %.3f at h = 1/32, 1/64, 1/128; order %.2f; %.1f s (limit 120 s)",
                table.rows[0].max_rel_error, table.rows[1].max_rel_error, final_err, verdict.overall_order, secs)};
}

std::vector<GreenSample> disk_samples(std::uint64_t seed) {
    const auto disk = DomainSpec::disk(1);
    return exact_disk_samples(disk, sample_pairs(disk, 10'000, seed, SamplingStrategy::boundary_stratified));
}

// 3. band constants with exact samples, re-sampled with a disjoint seed
Outcome disk_band() {
    const auto a = disk_samples(7), b = disk_samples(8);
    const auto ba = estimate_constants(a), bb = estimate_constants(b);
    const auto va = band_violations(a, ba), vb = band_violations(b, bb);
    const double change = rel(bb.c2, ba.c2);
    return {ba.c1 == 0.0 && bb.c1 == 0.0 && std::isfinite(ba.c2) && std::isfinite(bb.c2) && change <= 0.25 &&
                va.empty() && vb.empty(),
            fmt("c1 = %g / %g, c2 = %.4f / %.4f (change %.1f%%, limit 25%%), violations %zu / %zu", ba.c1, bb.c1,
                ba.c2, bb.c2, 100.0 * change, va.size(), vb.size())};
}

// 4. positivity radius on the disk
Outcome disk_positivity() {
    const auto disk = DomainSpec::disk(1);
    const auto s = disk_samples(9);
    std::size_t nonpos = 0;
    for (const auto& g : s) nonpos += g.G <= 0.0;
    const double r = positivity_radius(s, disk.diameter());
    return {r == disk.diameter() && nonpos == 0,
            fmt("%zu samples, %zu non-positive, positivity radius %g (diameter %g)", s.size(), nonpos, r,
                disk.diameter())};
}

// 5. sign-change smallness on the 5:1 ellipse
Outcome ellipse_negative_part() {
    const auto t0 = std::chrono::steady_clock::now();
    ScenarioConfig cfg;
    cfg.command = "verify-positivity";
    cfg.domain = "ellipse:5,1";
    cfg.h = 1.0 / 128.0;
    cfg.pairs = 20'000;
    cfg.seed = 2024;
    const auto rep = run(cfg);
    const auto& r = rep.results;
    const bool none = r["no_counterexample"].get<bool>();
    const double r_pos = r["r_positivity"].get<double>();
    bool beyond = true;
    for (const auto& neg : r["negatives"]) beyond = beyond && neg["r"].get<double>() >= r_pos;
    const double ratio = r["negative_to_positive"].get<double>();
    const bool pass = r["violations"].empty() && (none || (ratio < 1.0 && r_pos > 0.0 && beyond));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (none)
        return {pass, fmt("no counterexample: %zu samples, %d unknowns, all G > 0; %.0f s",
                          r["samples"].get<std::size_t>(), r["unknowns"].get<int>(), secs)};
    return {pass, fmt("%zu negatives of %zu, violations %zu (c1 = %.3g), max|G-|/maxG+ = %.3g, r_pos = %.3f; %.0f s",
                      r["negative_count"].get<std::size_t>(), r["samples"].get<std::size_t>(), r["violations"].size(),
                      r["c"].get<double>(), ratio, r_pos, secs)};
}

// 6. near-diagonal lower bound in the unit ball of R^3
Outcome ball_nehari() {
    const Dimension three(3);
    const auto a = nehari_region_check(three, ball_region_samples(three, 1.0, 10'000, 31, 0.5), 0.5);
    const auto b = nehari_region_check(three, ball_region_samples(three, 1.0, 40'000, 32, 0.5), 0.5);
    const double change = rel(b.c3, a.c3);
    return {a.violations.empty() && b.violations.empty() && a.c3 > 0.0 && b.c3 > 0.0 && change <= 0.10,
            fmt("c3 = %.5f (1e4 pairs) / %.5f (4e4 pairs), change %.1f%% (limit 10%%), non-positive %zu / %zu", a.c3,
                b.c3, 100.0 * change, a.violations.size(), b.violations.size())};
}

// 7. blow-up towards the half-plane kernel
Outcome blowup() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = blowup_sequence(DomainSpec::disk(1), {1.0, 0.0}, BlowupRegime::pair_distance, 4);
    const auto v = assess_blowup(res);
    long nodes = 0;
    for (const auto& s : res.steps) nodes = std::max(nodes, s.nodes);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string errs;
    for (const auto& s : res.steps) errs += (errs.empty() ? "" : ", ") + fmt("%.2e", s.abs_error);
    return {v.pass && res.steps.size() == 4 && nodes <= 1'000'000,
            fmt("errors %s; final/first %.3f (limit 0.5); growth ratio %.2f (limit 10); max %ld nodes; %.1f s",
                errs.c_str(), v.error_ratio, v.growth_ratio, nodes, secs)};
}

// 8. Duffin reflection
Outcome duffin() {
    const std::vector<double> hs{1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0};
    const auto F = duffin_extend(sample_halfplane([](Point2 y) { return y[0] * y[0]; }, hs.back(), 0.5, 0.5, -0.5, 0.5));
    double dev = 0.0;
    for (int r = 0; r < F.rows(); ++r)
        for (int c = 0; c < F.ny; ++c) dev = std::max(dev, std::abs(F.at(r, c) - F.y1(r) * F.y1(r)));
    ScenarioConfig cfg;
    cfg.command = "duffin";
    cfg.h_list = hs;
    cfg.field = "square";
    const auto sq = run(cfg);
    cfg.field = "halfspace";
    const auto hp = run(cfg);
    const auto& rows = hp.results["rows"];
    const double dev_tol = 1e3 * std::numeric_limits<double>::epsilon() * 0.25 / (hs.back() * hs.back());
    return {dev <= dev_tol && sq.results["pass"].get<bool>() && hp.results["pass"].get<bool>(),
            fmt("y1^2: max deviation %.1e (rounding bound %.1e), residuals at rounding level (%s); half-plane kernel residuals "
                "%.2e / %.2e / %.2e, ratios %.2f, %.2f (limit 2)",
                dev, dev_tol, sq.results["pass"].get<bool>() ? "yes" : "no", rows[0]["residual"].get<double>(),
                rows[1]["residual"].get<double>(), rows[2]["residual"].get<double>(), rows[1]["ratio"].get<double>(),
                rows[2]["ratio"].get<double>())};
}

// 9. H-estimator algebra
Outcome h_algebra() {
    CounterRng rng(909, 0);
    const double eps = std::numeric_limits<double>::epsilon();
    long mismatch = 0, homog = 0, mono = 0, checks = 0;
    const int count = 100'000;
    for (int k = 0; k < count; ++k) {
        const Dimension n(2 + static_cast<int>(rng.uniform() * 9.0));
        const double dx = std::exp(rng.uniform(-6.0, 2.0)), dy = std::exp(rng.uniform(-6.0, 2.0)),
                     r = std::exp(rng.uniform(-6.0, 2.0));
        const double h = h_estimate({n, dx, dy, r}), c = h_case_form({n, dx, dy, r});
        if (!(std::abs(h - c) <= 4.0 * eps * std::abs(h))) ++mismatch;
        if (n.value() == 2 || n.value() == 3 || n.value() == 5 || n.value() == 6) {
            for (double lambda : {0.5, 2.0, 10.0}) {
                ++checks;
                const double hl = h_estimate({n, lambda * dx, lambda * dy, lambda * r});
                if (!(rel(hl, std::pow(lambda, 4.0 - n.value()) * h) <= 1e-12)) ++homog;
            }
        }
        // non-decreasing in d(x) and d(y), non-increasing in |x - y|
        const double g = 1.0 + rng.uniform();
        if (h_estimate({n, g * dx, dy, r}) < h || h_estimate({n, dx, g * dy, r}) < h || h_estimate({n, dx, dy, g * r}) > h)
            ++mono;
    }
    return {mismatch == 0 && homog == 0 && mono == 0,
            fmt("%d inputs: %ld case-form mismatches, %ld of %ld homogeneity failures, %ld monotonicity failures",
                count, mismatch, homog, checks, mono)};
}

} // namespace

int main(int argc, char** argv) {
    std::setvbuf(stdout, nullptr, _IONBF, 0);
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"kernel oracle agreement", kernel_oracle},
        {"disk ground truth", disk_ground_truth},
        {"two-sided band on the disk", disk_band},
        {"positivity radius on the disk", disk_positivity},
        {"sign-change smallness on ellipse 5:1", ellipse_negative_part},
        {"near-diagonal lower bound, n = 3 ball", ball_nehari},
        {"blow-up convergence, regime A", blowup},
        {"Duffin reflection", duffin},
        {"H-estimator algebra", h_algebra},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::stoi(argv[i]));
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k) + 1;
        if (!only.empty() && !only.count(id)) continue;
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s [%d] %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[k].first, o.detail.c_str());
    }
    return failed == 0 ? 0 : 1;
}
