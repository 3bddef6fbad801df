#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "covar/copula.hpp"
#include "covar/errors.hpp"
#include "covar/numerics.hpp"
#include "test_support.hpp"

using namespace covar::copula;
using Catch::Approx;

namespace {

double clayton_ref(double u, double v, double t) { return std::pow(std::pow(u, -t) + std::pow(v, -t) - 1.0, -1.0 / t); }
double gumbel_ref(double u, double v, double d) {
    return std::exp(-std::pow(std::pow(-std::log(u), d) + std::pow(-std::log(v), d), 1.0 / d));
}
double frank_ref(double u, double v, double t) {
    return -std::log(1.0 + (std::exp(-t * u) - 1.0) * (std::exp(-t * v) - 1.0) / (std::exp(-t) - 1.0)) / t;
}

double frank_tau(double theta) {
    const double debye =
        covar::numerics::integrate_adaptive([](double t) { return t == 0.0 ? 1.0 : t / std::expm1(t); }, 0.0, theta) /
        theta;
    return 1.0 - 4.0 / theta * (1.0 - debye);
}

std::vector<CopulaSpec> representative() {
    return {CopulaSpec::clayton(2.0), CopulaSpec::gumbel(1.7),          CopulaSpec::frank(-4.0),
            CopulaSpec::student_t(0.5, 4.0), CopulaSpec::ips(2.0), CopulaSpec::gaussian(-0.3),
            reflect(CopulaSpec::clayton(1.0), Reflection::Reflect2), reflect(CopulaSpec::gumbel(2.0), Reflection::Survival),
            reflect(CopulaSpec::ips(0.5), Reflection::Survival)};
}

}  // namespace

TEST_CASE("closed-form families match reference formulas", "[copula]") {
    for (double u : {0.01, 0.3, 0.8}) {
        for (double v : {0.05, 0.5, 0.97}) {
            CHECK(copula_cdf(CopulaSpec::clayton(1.5), u, v) == Approx(clayton_ref(u, v, 1.5)).epsilon(1e-12));
            CHECK(copula_cdf(CopulaSpec::gumbel(2.5), u, v) == Approx(gumbel_ref(u, v, 2.5)).epsilon(1e-12));
            CHECK(copula_cdf(CopulaSpec::frank(3.0), u, v) == Approx(frank_ref(u, v, 3.0)).epsilon(1e-12));
            CHECK(copula_cdf(CopulaSpec::frank(-3.0), u, v) == Approx(frank_ref(u, v, -3.0)).epsilon(1e-12));
            // IPS at theta = 1 is the independence copula.
            CHECK(copula_cdf(CopulaSpec::ips(1.0), u, v) == Approx(u * v).epsilon(1e-11));
            CHECK(copula_cdf(CopulaSpec::independence(), u, v) == Approx(u * v));
        }
    }
}

TEST_CASE("elliptical copulas reproduce the orthant probability", "[copula]") {
    for (double rho : {-0.6, 0.0, 0.5, 0.9}) {
        const double expected = 0.25 + std::asin(rho) / (2.0 * std::numbers::pi);
        CHECK(copula_cdf(CopulaSpec::student_t(rho, 4.0), 0.5, 0.5) == Approx(expected).epsilon(1e-9));
        CHECK(copula_cdf(CopulaSpec::gaussian(rho), 0.5, 0.5) == Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("copula axioms: margins, Frechet bounds, 2-increasing", "[copula][property]") {
    const std::vector<double> g{0.0, 0.02, 0.1, 0.35, 0.5, 0.66, 0.9, 0.99, 1.0};
    for (const auto& c : representative()) {
        INFO(c.describe());
        for (double u : g) {
            CHECK(copula_cdf(c, u, 1.0) == Approx(u).margin(1e-12));
            CHECK(copula_cdf(c, 1.0, u) == Approx(u).margin(1e-12));
            CHECK(copula_cdf(c, u, 0.0) == 0.0);
            for (double v : g) {
                const double x = copula_cdf(c, u, v);
                CHECK(x >= std::max(0.0, u + v - 1.0) - 1e-12);
                CHECK(x <= std::min(u, v) + 1e-12);
            }
        }
        for (std::size_t i = 0; i + 1 < g.size(); ++i)
            for (std::size_t j = 0; j + 1 < g.size(); ++j) {
                const double mass = copula_cdf(c, g[i + 1], g[j + 1]) - copula_cdf(c, g[i], g[j + 1]) -
                                    copula_cdf(c, g[i + 1], g[j]) + copula_cdf(c, g[i], g[j]);
                CHECK(mass >= -1e-10);
            }
    }
}

TEST_CASE("reflections follow the defining identities", "[copula][reflection]") {
    const CopulaSpec base = CopulaSpec::frank(5.0);
    for (double u : {0.1, 0.45, 0.8}) {
        for (double v : {0.2, 0.6, 0.95}) {
            CHECK(copula_cdf(reflect(base, Reflection::Reflect2), u, v) ==
                  Approx(u - copula_cdf(base, u, 1.0 - v)).margin(1e-13));
            CHECK(copula_cdf(reflect(base, Reflection::Reflect1), u, v) ==
                  Approx(v - copula_cdf(base, 1.0 - u, v)).margin(1e-13));
            CHECK(copula_cdf(reflect(base, Reflection::Survival), u, v) ==
                  Approx(u + v - 1.0 + copula_cdf(base, 1.0 - u, 1.0 - v)).margin(1e-13));
        }
    }
    for (const auto& c : representative())
        for (Reflection r : {Reflection::Reflect1, Reflection::Reflect2, Reflection::Survival}) {
            CHECK(reflect(reflect(c, r), r) == c);
        }
    CHECK(compose(Reflection::Reflect1, Reflection::Reflect2) == Reflection::Survival);
    // Gumbel 2-reflection in the deep tail keeps relative precision.
    const CopulaSpec g2 = reflect(CopulaSpec::gumbel(2.0), Reflection::Reflect2);
    const double u = 1e-6;
    const double v = 1e-6;
    CHECK(copula_cdf(g2, u, v) > 0.0);
    CHECK(copula_cdf(g2, u, v) < u * v * 1e-3);
}

TEST_CASE("describe and parse", "[copula]") {
    CHECK(CopulaSpec::clayton(1.0).describe() == "clayton(theta=1)");
    CHECK(reflect(CopulaSpec::clayton(1.0), Reflection::Reflect2).describe() == "clayton(theta=1)^2*");
    CHECK(parse_family("t") == Family::StudentT);
    CHECK(parse_reflection("survival") == Reflection::Survival);
    CHECK_THROWS_AS(parse_family("bogus"), covar::InvalidArgument);
    CHECK_THROWS_AS(CopulaSpec::clayton(-1.0), covar::InvalidArgument);
    CHECK_THROWS_AS(CopulaSpec::gumbel(0.5), covar::InvalidArgument);
    CHECK_THROWS_AS(CopulaSpec::student_t(1.0, 4.0), covar::InvalidArgument);
    CHECK_THROWS_AS(CopulaSpec::frank(0.0), covar::InvalidArgument);
}

TEST_CASE("v_exact: Frechet bounds and the Clayton closed form", "[copula][v_exact]") {
    for (double q = 0.1; q < 0.95; q += 0.2) {
        for (double p = 0.1; p < 0.95; p += 0.2) {
            CHECK(v_exact(CopulaSpec::independence(), q, p) == Approx(q).margin(1e-12));
            CHECK(v_exact(CopulaSpec::comonotone(), q, p) == Approx(q * p).margin(1e-12));
            CHECK(v_exact(CopulaSpec::countermonotone(), q, p) == Approx(1.0 - (1.0 - q) * p).margin(1e-12));
        }
    }
    const double theta = 2.0;
    for (double p : {0.5, 0.05, 1e-4}) {
        for (double q : {0.1, 0.5, 0.9}) {
            const double closed = std::pow(std::pow(q * p, -theta) - std::pow(p, -theta) + 1.0, -1.0 / theta);
            CHECK(v_exact(CopulaSpec::clayton(theta), q, p) == Approx(closed).epsilon(1e-10));
        }
    }
}

TEST_CASE("v_exact inverts the conditional cdf and respects PQD bounds", "[copula][v_exact]") {
    for (const auto& c : {CopulaSpec::clayton(1.0), CopulaSpec::gumbel(1.5), CopulaSpec::frank(4.0),
                          reflect(CopulaSpec::ips(2.0), Reflection::Survival)}) {
        INFO(c.describe());
        double prev = 0.0;
        for (double q : {0.05, 0.25, 0.5, 0.75, 0.95}) {
            const double p = 0.03;
            const double v = v_exact(c, q, p);
            CHECK(conditional_cdf_given_le(c, v, p) == Approx(q).epsilon(1e-8));
            CHECK(v > prev);
            CHECK(v <= q + 1e-12);  // positive quadrant dependence
            CHECK(v >= q * p - 1e-12);
            prev = v;
        }
    }
}

TEST_CASE("v_exact reflection identity", "[copula][v_exact]") {
    for (const auto& c : {CopulaSpec::clayton(1.0), CopulaSpec::frank(3.0), CopulaSpec::gumbel(2.0)}) {
        for (double q : {0.2, 0.5, 0.8}) {
            for (double p : {0.01, 0.2}) {
                CHECK(v_exact(c, q, p) + v_exact(reflect(c, Reflection::Reflect2), 1.0 - q, p) ==
                      Approx(1.0).margin(1e-8));
            }
        }
    }
    CHECK_THROWS_AS(v_exact(CopulaSpec::clayton(1.0), 0.0, 0.5), covar::InvalidArgument);
    CHECK_THROWS_AS(v_exact(CopulaSpec::clayton(1.0), 0.5, 1.0), covar::InvalidArgument);
}

TEST_CASE("samplers: uniform margins and Kendall's tau", "[copula][sampling]") {
    const std::size_t n = 20000;
    struct Case {
        CopulaSpec c;
        double tau;
    };
    const double t_tau = 2.0 / std::numbers::pi * std::asin(0.5);
    const std::vector<Case> cases{
        {CopulaSpec::clayton(2.0), 0.5},
        {CopulaSpec::gumbel(2.0), 0.5},
        {CopulaSpec::frank(5.0), frank_tau(5.0)},
        {CopulaSpec::frank(-5.0), frank_tau(-5.0)},
        {CopulaSpec::student_t(0.5, 4.0), t_tau},
        {CopulaSpec::gaussian(0.5), t_tau},
        {reflect(CopulaSpec::clayton(2.0), Reflection::Reflect2), -0.5},
        {reflect(CopulaSpec::gumbel(2.0), Reflection::Survival), 0.5},
        {CopulaSpec::independence(), 0.0},
    };
    // KS critical value at the 0.1% level is about 1.95 / sqrt(n).
    const double ks_crit = 1.95 / std::sqrt(static_cast<double>(n));
    std::uint64_t seed = 11;
    for (const auto& [c, tau] : cases) {
        INFO(c.describe());
        const UniformPairSample s = sample(c, n, ++seed);
        REQUIRE(s.size() == n);
        CHECK(covar::testing::ks_uniform(s.u) < ks_crit);
        CHECK(covar::testing::ks_uniform(s.v) < ks_crit);
        CHECK(covar::testing::kendall_tau(s.u, s.v) == Approx(tau).margin(0.02));
    }
}

TEST_CASE("samplers agree with the copula cdf", "[copula][sampling]") {
    const std::size_t n = 20000;
    std::uint64_t seed = 100;
    for (const auto& c : representative()) {
        INFO(c.describe());
        const UniformPairSample s = sample(c, n, ++seed);
        for (double u : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            for (double v : {0.1, 0.3, 0.5, 0.7, 0.9}) {
                std::size_t count = 0;
                for (std::size_t i = 0; i < n; ++i) count += (s.u[i] <= u && s.v[i] <= v);
                CHECK(static_cast<double>(count) / n == Approx(copula_cdf(c, u, v)).margin(0.015));
            }
        }
    }
}

TEST_CASE("sampling is deterministic in the seed", "[copula][sampling]") {
    const CopulaSpec c = CopulaSpec::student_t(0.3, 5.0);
    const auto a = sample(c, 500, 42);
    const auto b = sample(c, 500, 42);
    const auto d = sample(c, 500, 43);
    CHECK(a.u == b.u);
    CHECK(a.v == b.v);
    CHECK(a.u != d.u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.u[i] > 0.0);
        CHECK(a.u[i] < 1.0);
    }
}
