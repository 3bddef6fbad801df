#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "covar/errors.hpp"
#include "covar/numerics.hpp"

using namespace covar::numerics;
using Catch::Approx;

TEST_CASE("incomplete gamma matches closed forms", "[numerics][gamma]") {
    for (double x : {1e-6, 0.1, 0.5, 1.0, 3.0, 10.0, 40.0}) {
        CHECK(reg_incomplete_gamma(1.0, x) == Approx(-std::expm1(-x)).epsilon(1e-13));
        CHECK(reg_incomplete_gamma(0.5, x) == Approx(std::erf(std::sqrt(x))).epsilon(1e-12));
        // Integer shape: Q(n, x) = e^{-x} sum_{j<n} x^j / j!
        double term = 1.0;
        double sum = 0.0;
        for (int j = 0; j < 4; ++j) {
            sum += term;
            term *= x / (j + 1);
        }
        CHECK(reg_incomplete_gamma_upper(4.0, x) == Approx(std::exp(-x) * sum).epsilon(1e-12));
    }
}

TEST_CASE("incomplete gamma complement and inverse", "[numerics][gamma]") {
    for (double a : {0.05, 0.5, 1.0, 2.5, 20.0}) {
        for (double x : {1e-3, 0.3, 2.0, 15.0}) {
            CHECK(reg_incomplete_gamma(a, x) + reg_incomplete_gamma_upper(a, x) == Approx(1.0).epsilon(1e-14));
        }
        for (double q : {1e-10, 1e-4, 0.1, 0.5, 0.9, 0.999999}) {
            const double x = reg_incomplete_gamma_inv(a, q);
            CHECK(reg_incomplete_gamma(a, x) == Approx(q).epsilon(1e-11));
        }
    }
    CHECK_THROWS_AS(reg_incomplete_gamma(-1.0, 1.0), covar::InvalidArgument);
}

TEST_CASE("incomplete beta identities and quadrature oracle", "[numerics][beta]") {
    for (double x : {0.01, 0.2, 0.5, 0.77, 0.99}) {
        CHECK(reg_incomplete_beta(1.0, 1.0, x) == Approx(x).epsilon(1e-14));
        CHECK(reg_incomplete_beta(2.5, 1.0, x) == Approx(std::pow(x, 2.5)).epsilon(1e-13));
        CHECK(reg_incomplete_beta(2.0, 3.5, x) == Approx(1.0 - reg_incomplete_beta(3.5, 2.0, 1.0 - x)).epsilon(1e-12));
        const double a = 3.0;
        const double b = 1.5;
        const double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
        const double integral = integrate_adaptive(
            [&](double t) { return std::exp((a - 1) * std::log(t) + (b - 1) * std::log1p(-t) - log_beta); }, 0.0, x);
        CHECK(reg_incomplete_beta(a, b, x) == Approx(integral).epsilon(1e-10));
    }
}

TEST_CASE("student t matches Cauchy and df=2 closed forms", "[numerics][t]") {
    for (double x : {-50.0, -3.0, -0.4, 0.0, 0.7, 4.0, 100.0}) {
        CHECK(student_t_cdf(x, 1.0) == Approx(0.5 + std::atan(x) / std::numbers::pi).epsilon(1e-12));
        CHECK(student_t_cdf(x, 2.0) == Approx(0.5 + x / (2.0 * std::sqrt(2.0 + x * x))).epsilon(1e-12));
        CHECK(student_t_pdf(x, 1.0) == Approx(1.0 / (std::numbers::pi * (1 + x * x))).epsilon(1e-12));
    }
    for (double df : {0.7, 3.0, 4.0, 30.0}) {
        for (double q : {1e-8, 0.01, 0.3, 0.5, 0.95, 1 - 1e-9}) {
            CHECK(student_t_cdf(student_t_quantile(q, df), df) == Approx(q).epsilon(1e-10));
        }
        CHECK(student_t_cdf(-1.3, df) + student_t_cdf(1.3, df) == Approx(1.0).epsilon(1e-14));
    }
    CHECK(student_t_cdf(1.5, 1e7) == Approx(normal_cdf(1.5)).epsilon(1e-6));
}

TEST_CASE("normal cdf and quantile", "[numerics][normal]") {
    for (double x : {-30.0, -5.0, -1.0, 0.0, 2.0, 8.0}) {
        CHECK(normal_cdf(x) == Approx(0.5 * std::erfc(-x / std::numbers::sqrt2)).epsilon(1e-13));
    }
    for (double q : {1e-300, 1e-20, 1e-5, 0.2, 0.5, 0.975, 1 - 1e-12}) {
        CHECK(normal_cdf(normal_quantile(q)) == Approx(q).epsilon(1e-11));
    }
    CHECK(normal_quantile(0.975) == Approx(1.959963984540054).epsilon(1e-14));
}

TEST_CASE("monotone root finder", "[numerics][root]") {
    const double r = find_root_monotone([](double x) { return x * x - 2.0; }, 0.0, 2.0, 1e-15);
    CHECK(r == Approx(std::numbers::sqrt2).epsilon(1e-14));

    // A flat zero segment resolves to its left end.
    const auto step = [](double x) { return x < 0.3 ? -1.0 : (x < 0.6 ? 0.0 : 1.0); };
    CHECK(find_root_monotone(step, 0.0, 1.0, 1e-14) == Approx(0.3).margin(1e-13));

    // Generalized inverse of a cdf with a jump.
    const auto jump = [](double x) { return (x < 0.5 ? x : x + 0.25) - 0.6; };
    CHECK(find_root_monotone(jump, 0.0, 1.0, 1e-14) == Approx(0.5).margin(1e-13));

    CHECK_THROWS_AS(find_root_monotone([](double x) { return x + 1.0; }, 0.0, 1.0, 1e-12), covar::BracketError);
}

TEST_CASE("midpoint rule and adaptive quadrature", "[numerics][quadrature]") {
    const int n = 201;
    const auto nodes = midpoint_nodes(n);
    REQUIRE(nodes.size() == static_cast<std::size_t>(n));
    CHECK(nodes.front() == Approx(0.5 / n));
    CHECK(nodes.back() == Approx(1.0 - 0.5 / n));
    // Exact midpoint error for x^2 is -1/(12 n^2).
    CHECK(integrate_unit_interval([](double x) { return x * x; }, n) ==
          Approx(1.0 / 3.0 - 1.0 / (12.0 * n * n)).epsilon(1e-13));
    CHECK(integrate_adaptive([](double x) { return std::sin(x); }, 0.0, std::numbers::pi) == Approx(2.0).epsilon(1e-12));
    CHECK(integrate_adaptive([](double x) { return std::log(x); }, 0.0, 1.0) == Approx(-1.0).epsilon(1e-9));
    CHECK_THROWS_AS(integrate_unit_interval([](double) { return std::nan(""); }), covar::NumericError);
}

TEST_CASE("bounded Nelder-Mead", "[numerics][minimize]") {
    const BoxConstraint box({-2.0, -2.0}, {2.0, 2.0});
    const Objective rosen = [](std::span<const double> x) {
        return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
    };
    const std::vector<double> start{-1.2, 1.0};
    MinimizeOptions opt;
    opt.max_evaluations = 5000;
    opt.diameter_tol = 1e-10;
    const MinimizeResult a = minimize_derivative_free(rosen, box, start, opt);
    CHECK(a.argmin[0] == Approx(1.0).margin(1e-4));
    CHECK(a.argmin[1] == Approx(1.0).margin(1e-4));

    const MinimizeResult b = minimize_derivative_free(rosen, box, start, opt);
    CHECK(a.argmin == b.argmin);
    CHECK(a.value == b.value);

    // Unconstrained minimum outside the box lands on the boundary.
    const Objective shifted = [](std::span<const double> x) { return std::pow(x[0] - 5.0, 2) + std::pow(x[1], 2); };
    const MinimizeResult c = minimize_derivative_free(shifted, box, start, opt);
    CHECK(c.argmin[0] == Approx(2.0).margin(1e-6));
    CHECK(box.on_boundary(c.argmin));

    const MinimizeResult flat =
        minimize_derivative_free([](std::span<const double>) { return 1.0; }, box, start, opt);
    CHECK(flat.non_identified);
}
