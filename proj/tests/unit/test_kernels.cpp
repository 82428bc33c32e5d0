#include <catch_amalgamated.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "biharm/kernels.hpp"

using namespace biharm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double pi = std::numbers::pi;

// Independent oracle: adaptive Gauss-Kronrod in s = v - 1, where the integrand
// (2s + s^2)(1 + s)^{1-n} has no cancellation near v = 1. The depth cap keeps
// tiny intervals from recursing on the estimator's absolute error floor.
double quad_integral(int n, double A) {
    auto f = [n](double s) { return (2.0 * s + s * s) * std::pow(1.0 + s, 1.0 - n); };
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, A - 1.0, 6, 1e-13, &err);
}

// Laplacian of a radial function u(r) in R^n by central differences.
template <class F>
double radial_laplacian(F u, int n, double r, double d) {
    const double u2 = (u(r + d) - 2.0 * u(r) + u(r - d)) / (d * d);
    const double u1 = (u(r + d) - u(r - d)) / (2.0 * d);
    return u2 + (n - 1) / r * u1;
}

} // namespace

TEST_CASE("Dimension rejects n < 2 and partitions the cases") {
    REQUIRE_THROWS_AS(Dimension(1), std::invalid_argument);
    CHECK(Dimension(2).kind() == DimensionCase::two);
    CHECK(Dimension(3).kind() == DimensionCase::three);
    CHECK(Dimension(4).kind() == DimensionCase::four);
    for (int n = 5; n < 20; ++n) CHECK(Dimension(n).kind() == DimensionCase::above_four);
}

TEST_CASE("unit ball volumes match the Gamma-function formula") {
    for (int n = 1; n <= 24; ++n) {
        const double gamma_form = std::pow(pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
        CHECK_THAT(unit_ball_volume(n), WithinRel(gamma_form, 1e-14));
    }
}

TEST_CASE("planar prefactor equals 1/(8 pi)") {
    CHECK_THAT(boggio_prefactor(Dimension(2)), WithinRel(1.0 / (8.0 * pi), 1e-15));
    CHECK_THAT(boggio_prefactor(Dimension(3)), WithinRel(1.0 / (12.0 * 4.0 * pi / 3.0), 1e-15));
}

TEST_CASE("boggio_integral worked values") {
    CHECK(boggio_integral(Dimension(2), 1.0) == 0.0);
    CHECK_THAT(boggio_integral(Dimension(2), 2.0), WithinRel(1.5 - std::log(2.0), 1e-15));
    CHECK_THAT(boggio_integral(Dimension(2), 2.0), WithinAbs(0.806853, 1e-6));
    CHECK_THAT(boggio_integral(Dimension(3), 2.0), WithinRel(0.5, 1e-15));
    CHECK_THAT(boggio_integral(Dimension(4), 2.0), WithinRel(std::log(2.0) + 0.5 * (0.25 - 1.0), 1e-15));
    CHECK_THAT(boggio_integral(Dimension(4), 2.0), WithinAbs(0.318147, 1e-6));
    REQUIRE_THROWS_AS(boggio_integral(Dimension(2), 0.999), std::invalid_argument);
}

TEST_CASE("boggio_integral agrees with adaptive quadrature") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 2000; ++k) {
        const int n = 2 + static_cast<int>(u(rng) * 9.0) % 9;
        const double A = 1.0 + 1e-6 * std::pow(1e9, u(rng)); // log-uniform in [1 + 1e-6, 1e3]
        const double q = quad_integral(n, A);
        CHECK_THAT(boggio_integral(Dimension(n), A), WithinRel(q, 1e-10));
    }
}

TEST_CASE("small-shift branch matches a high-precision Taylor sum") {
    // I(1 + t) = sum_k c_k t^k with c_k from expanding (v^2 - 1) v^{1-n} at v = 1.
    for (int n : {2, 3, 4, 7}) {
        for (double t : {1e-12, 1e-9, 1e-6, 1e-4, 1e-3, 0.015}) {
            // integrand in s = v - 1: (2s + s^2)(1 + s)^{1-n}
            long double sum = 0.0L, binom = 1.0L; // binom = C(1-n, j)
            for (int j = 0; j < 40; ++j) {
                if (j > 0) binom *= static_cast<long double>(1 - n - (j - 1)) / j;
                // contributes 2 s^{j+1} + s^{j+2} times binom, integrated to t
                sum += binom * (2.0L * std::pow(static_cast<long double>(t), j + 2) / (j + 2) +
                                std::pow(static_cast<long double>(t), j + 3) / (j + 3));
            }
            CHECK_THAT(boggio_integral_shifted(Dimension(n), t), WithinRel(static_cast<double>(sum), 1e-13));
        }
    }
}

TEST_CASE("boggio_integral is monotone in A") {
    for (int n = 2; n <= 10; ++n) {
        double prev = 0.0;
        for (double A = 1.0; A < 50.0; A *= 1.07) {
            const double v = boggio_integral(Dimension(n), A);
            CHECK(v >= prev);
            prev = v;
        }
    }
}

TEST_CASE("fundamental solution") {
    CHECK(fundamental_solution(Dimension(2), 1.0) == 0.0);
    CHECK(fundamental_solution(Dimension(2), 0.5) < 0.0);
    REQUIRE_THROWS_AS(fundamental_solution(Dimension(3), 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(fundamental_solution(Dimension(3), -1.0), std::invalid_argument);

    SECTION("unit flux of grad(Lap u) through a sphere") {
        for (int n = 2; n <= 7; ++n) {
            const Dimension dim(n);
            auto u = [&](double r) { return fundamental_solution(dim, r); };
            const double rho = 1.3, d = 1e-3;
            const double dlap = (radial_laplacian(u, n, rho + d, d) - radial_laplacian(u, n, rho - d, d)) / (2.0 * d);
            const double area = n * unit_ball_volume(n) * std::pow(rho, n - 1);
            CHECK_THAT(area * dlap, WithinRel(1.0, 1e-4));
        }
    }

    SECTION("n = 5, r = 2 against the hand-evaluated constant") {
        // r^{-1} / (2 (n-2)(n-4) n e_n) with e_5 = 8 pi^2 / 15
        const double expected = 0.5 / (2.0 * 3.0 * 1.0 * 5.0 * 8.0 * pi * pi / 15.0);
        CHECK_THAT(fundamental_solution(Dimension(5), 2.0), WithinRel(expected, 1e-14));
    }
}

TEST_CASE("half-space kernel worked values") {
    const Dimension two(2), three(3);
    const std::vector<double> xi{-1.0, 0.0}, eta{-3.0, 0.0};
    CHECK_THAT(halfspace_green(two, xi, eta), WithinRel(4.0 * (1.5 - std::log(2.0)) / (8.0 * pi), 1e-14));
    CHECK_THAT(halfspace_green(two, xi, eta), WithinAbs(0.128415, 1e-6));
    CHECK_THAT(halfspace_green(two, xi, xi), WithinRel(1.0 / (4.0 * pi), 1e-14));
    CHECK(halfspace_green(two, std::vector<double>{-1.0, 0.3}, std::vector<double>{0.0, 0.7}) == 0.0);
    CHECK_THAT(halfspace_green(three, std::vector<double>{-1.0, 0.0, 0.0}, std::vector<double>{-3.0, 0.0, 0.0}),
               WithinRel(1.0 / (16.0 * pi), 1e-14));
    CHECK_THAT(halfspace_green(three, std::vector<double>{-2.0, 1.0, 0.0}, std::vector<double>{-2.0, 1.0, 0.0}),
               WithinRel(2.0 / (8.0 * pi), 1e-14));

    REQUIRE_THROWS_AS(halfspace_green(two, std::vector<double>{0.1, 0.0}, eta), std::domain_error);
    REQUIRE_THROWS_AS(halfspace_green(Dimension(4), std::vector<double>{-1, 0, 0, 0}, std::vector<double>{-1, 0, 0, 0}),
                      std::domain_error);
}

TEST_CASE("half-space kernel: symmetry, positivity and quadratic boundary vanishing") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int n = 2; n <= 6; ++n) {
        const Dimension dim(n);
        for (int k = 0; k < 200; ++k) {
            std::vector<double> a(n), b(n);
            for (int i = 0; i < n; ++i) {
                a[i] = u(rng);
                b[i] = u(rng);
            }
            a[0] = -std::abs(a[0]) - 1e-3;
            b[0] = -std::abs(b[0]) - 1e-3;
            const double g = halfspace_green(dim, a, b);
            CHECK(g > 0.0);
            CHECK_THAT(halfspace_green(dim, b, a), WithinRel(g, 1e-14));
        }
        std::vector<double> eta(n, 0.2);
        eta[0] = -0.7;
        std::vector<double> ratios;
        for (double t : {1e-2, 1e-3, 1e-4}) {
            std::vector<double> x(n, 0.0);
            x[0] = -t;
            ratios.push_back(halfspace_green(dim, x, eta) / (t * t));
        }
        CHECK(ratios.back() > 0.0);
        CHECK_THAT(ratios[2], WithinRel(ratios[1], 2e-2));
        CHECK(std::abs(ratios[2] - ratios[1]) < std::abs(ratios[1] - ratios[0]));
    }
}

TEST_CASE("ball kernel worked values and scaling") {
    const Dimension two(2);
    const std::vector<double> o{0.0, 0.0}, p{0.5, 0.0}, edge{1.0, 0.0};
    CHECK_THAT(ball_green(two, o, p), WithinRel(0.25 * (1.5 - std::log(2.0)) / (8.0 * pi), 1e-14));
    CHECK_THAT(ball_green(two, o, p), WithinAbs(0.008026, 1e-6));
    CHECK_THAT(ball_green(two, o, o), WithinRel(1.0 / (16.0 * pi), 1e-14));
    CHECK(ball_green(two, edge, p) == 0.0);
    REQUIRE_THROWS_AS(ball_green(two, std::vector<double>{1.1, 0.0}, p), std::domain_error);

    // n = 3 diagonal limit (1 - |x|^2) / (16 pi)
    const std::vector<double> x3{0.3, 0.1, -0.2};
    CHECK_THAT(ball_green(Dimension(3), x3, x3), WithinRel((1.0 - 0.14) / (16.0 * pi), 1e-14));

    // radius scaling G_R(x, y) = R^{4-n} G_1(x / R, y / R)
    for (int n = 2; n <= 5; ++n) {
        const Dimension dim(n);
        std::vector<double> a(n, 0.1), b(n, -0.15), as(n), bs(n);
        const double R = 2.5;
        for (int i = 0; i < n; ++i) {
            as[i] = a[i] * R;
            bs[i] = b[i] * R;
        }
        CHECK_THAT(ball_green(dim, as, bs, R), WithinRel(std::pow(R, 4.0 - n) * ball_green(dim, a, b), 1e-13));
        CHECK_THAT(ball_green(dim, b, a), WithinRel(ball_green(dim, a, b), 1e-14));
    }
}

TEST_CASE("ball kernel is the Green function: Lap^2 vanishes and quadratic decay at the sphere") {
    const Dimension two(2);
    const std::vector<double> y{0.2, -0.1};
    auto G = [&](double a, double b) { return ball_green(two, std::vector<double>{a, b}, y); };
    // 13-point stencil with a moderate step at a point away from y
    const double d = 2e-2, a = -0.4, b = 0.3;
    const double lap2 = (20.0 * G(a, b) - 8.0 * (G(a + d, b) + G(a - d, b) + G(a, b + d) + G(a, b - d)) +
                         2.0 * (G(a + d, b + d) + G(a + d, b - d) + G(a - d, b + d) + G(a - d, b - d)) +
                         G(a + 2 * d, b) + G(a - 2 * d, b) + G(a, b + 2 * d) + G(a, b - 2 * d)) /
                        std::pow(d, 4);
    CHECK(std::abs(lap2) < 1e-3);
    const double g1 = G(0.0, 1.0 - 1e-3) / 1e-6, g2 = G(0.0, 1.0 - 1e-4) / 1e-8;
    CHECK_THAT(g2, WithinRel(g1, 2e-2));
}

TEST_CASE("h_estimate worked values") {
    CHECK_THAT(h_estimate({Dimension(5), 1.0, 1.0, 2.0}), WithinRel(1.0 / 32.0, 1e-15));
    CHECK_THAT(h_estimate({Dimension(4), 1.0, 1.0, 1.0}), WithinRel(std::log(2.0), 1e-15));
    CHECK_THAT(h_estimate({Dimension(2), 0.3, 0.3, 0.0}), WithinRel(0.09, 1e-15));
    CHECK(h_estimate({Dimension(3), 0.0, 0.4, 0.2}) == 0.0);
    CHECK(std::isinf(h_estimate({Dimension(4), 1.0, 1.0, 0.0})));
    CHECK(std::isinf(h_estimate({Dimension(6), 1.0, 1.0, 0.0})));
    CHECK_THAT(h_estimate({Dimension(3), 0.25, 0.36, 0.0}), WithinRel(0.3, 1e-15));
    REQUIRE_THROWS_AS(h_estimate({Dimension(2), -1.0, 1.0, 1.0}), std::invalid_argument);
    REQUIRE_THROWS_AS(h_case_form({Dimension(2), 1.0, 1.0, -1.0}), std::invalid_argument);
}

TEST_CASE("h_case_form worked values") {
    CHECK_THAT(h_case_form({Dimension(5), 1.0, 1.0, 2.0}), WithinRel(1.0 / 32.0, 1e-15));
    CHECK_THAT(h_case_form({Dimension(3), 2.0, 2.0, 1.0}), WithinRel(2.0, 1e-15));
    const HInput edge{Dimension(2), 0.5, 0.5, 0.5};
    CHECK_THAT(h_case_form(edge), WithinRel(h_estimate(edge), 1e-15));
}

TEST_CASE("h_estimate symmetry, homogeneity and monotonicity") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.01, 2.0);
    for (int n : {2, 3, 4, 5, 6, 9}) {
        for (int k = 0; k < 500; ++k) {
            const double dx = u(rng), dy = u(rng), r = u(rng);
            const Dimension dim(n);
            const double h = h_estimate({dim, dx, dy, r});
            CHECK(h == h_estimate({dim, dy, dx, r}));
            CHECK(h_estimate({dim, dx * 1.1, dy, r}) >= h);
            CHECK(h_estimate({dim, dx, dy, r * 1.1}) <= h);
            if (n != 4) {
                for (double lambda : {0.5, 2.0, 10.0})
                    CHECK_THAT(h_estimate({dim, lambda * dx, lambda * dy, lambda * r}),
                               WithinRel(std::pow(lambda, 4.0 - n) * h, 1e-13));
            }
        }
    }
}
