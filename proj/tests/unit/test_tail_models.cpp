#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "covar/copula.hpp"
#include "covar/errors.hpp"
#include "covar/numerics.hpp"
#include "covar/tail_models.hpp"

using namespace covar::tail;
using covar::copula::CopulaSpec;
using covar::copula::Reflection;
using Catch::Approx;

namespace {

double t_tdf_ref(double w1, double w2, double rho, double nu) {
    const double s = std::sqrt((nu + 1.0) / (1.0 - rho * rho));
    return w1 * covar::numerics::student_t_cdf(-s * (std::pow(w1 / w2, 1.0 / nu) - rho), nu + 1.0) +
           w2 * covar::numerics::student_t_cdf(-s * (std::pow(w2 / w1, 1.0 / nu) - rho), nu + 1.0);
}

}  // namespace

TEST_CASE("tail dependence functions match their formulas", "[tail][tdf]") {
    const TailModel clayton(Regime::Attraction, ModelFamily::ClaytonTDF, {1.5});
    const TailModel gumbel(Regime::Attraction, ModelFamily::ReflectedGumbelTDF, {2.0});
    const TailModel t(Regime::Mixed, ModelFamily::StudentTTDF, {0.5, 4.0});
    for (double w1 : {0.1, 1.0, 1.7}) {
        for (double w2 : {0.2, 1.0, 1.9}) {
            CHECK(tdf_eval(clayton, w1, w2) ==
                  Approx(std::pow(std::pow(w1, -1.5) + std::pow(w2, -1.5), -1.0 / 1.5)).epsilon(1e-12));
            CHECK(tdf_eval(gumbel, w1, w2) ==
                  Approx(w1 + w2 - std::pow(w1 * w1 + w2 * w2, 0.5)).epsilon(1e-12));
            CHECK(tdf_eval(t, w1, w2) == Approx(t_tdf_ref(w1, w2, 0.5, 4.0)).epsilon(1e-9));
            // Homogeneity of order one.
            CHECK(tdf_eval(t, 3 * w1, 3 * w2) == Approx(3 * tdf_eval(t, w1, w2)).epsilon(1e-10));
        }
    }
    CHECK(tdf_eval(t, 1.0, 1.0) ==
          Approx(2 * covar::numerics::student_t_cdf(-std::sqrt(5.0 * 0.5 / 1.5), 5.0)).epsilon(1e-10));
}

TEST_CASE("tail dependence functions are limits of the copula", "[tail][tdf]") {
    const double u = 1e-7;
    const TailModel clayton(Regime::Attraction, ModelFamily::ClaytonTDF, {1.0});
    const TailModel gumbel(Regime::Attraction, ModelFamily::ReflectedGumbelTDF, {2.0});
    const CopulaSpec cc = CopulaSpec::clayton(1.0);
    const CopulaSpec gs = covar::copula::reflect(CopulaSpec::gumbel(2.0), Reflection::Survival);
    for (double w1 : {0.3, 1.0}) {
        for (double w2 : {0.5, 1.0, 1.6}) {
            CHECK(covar::copula::copula_cdf(cc, u * w1, u * w2) / u == Approx(tdf_eval(clayton, w1, w2)).epsilon(1e-5));
            CHECK(covar::copula::copula_cdf(gs, u * w1, u * w2) / u == Approx(tdf_eval(gumbel, w1, w2)).epsilon(1e-3));
        }
    }
}

TEST_CASE("H, its inverse and b_infinity", "[tail][H]") {
    const TailModel clayton(Regime::Attraction, ModelFamily::ClaytonTDF, {2.0});
    const TailModel gumbel(Regime::Attraction, ModelFamily::ReflectedGumbelTDF, {3.0});
    const TailModel t(Regime::Mixed, ModelFamily::StudentTTDF, {0.3, 3.0});
    CHECK(b_infinity(clayton) == Approx(1.0));
    CHECK(b_infinity(gumbel) == Approx(1.0));
    CHECK(H_eval(t, 1e30) == Approx(b_infinity(t)).epsilon(1e-8));
    CHECK(b_infinity(t) == Approx(covar::numerics::student_t_cdf(2.0 * 0.3 / std::sqrt(0.91), 4.0)).epsilon(1e-12));
    CHECK(H2_eval(t, 1e30) == Approx(b_infinity_2star(t)).epsilon(1e-8));
    CHECK(b_infinity(t) + b_infinity_2star(t) == Approx(1.0).epsilon(1e-10));
    for (const TailModel* m : {&clayton, &gumbel, &t}) {
        for (double q : {0.05, 0.2, 0.4}) {
            CHECK(H_eval(*m, H_inverse(*m, q)) == Approx(q).epsilon(1e-10));
        }
    }
    // Clayton closed form H^{-1}(q) = (q^{-theta} - 1)^{-1/theta}.
    CHECK(H_inverse(clayton, 0.5) == Approx(std::pow(std::pow(0.5, -2.0) - 1.0, -0.5)).epsilon(1e-10));
    CHECK_THROWS_AS(H_inverse(t, 0.99), covar::OutOfRange);
    CHECK_THROWS_AS(H2_eval(clayton, 1.0), covar::WrongRegime);
}

TEST_CASE("boundary cdfs", "[tail][boundary]") {
    const TailModel frank(Regime::Balance, ModelFamily::FrankBoundary, {3.0});
    const TailModel ips(Regime::Balance, ModelFamily::ReflectedIPSBoundary, {2.0});
    const TailModel ips1(Regime::Balance, ModelFamily::ReflectedIPSBoundary, {1.0});
    for (double v : {0.01, 0.3, 0.5, 0.9}) {
        CHECK(boundary_cdf_eval(frank, v) == Approx((1 - std::exp(-3 * v)) / (1 - std::exp(-3.0))).epsilon(1e-13));
        CHECK(boundary_cdf_eval(ips1, v) == Approx(v).epsilon(1e-11));
        for (const TailModel* m : {&frank, &ips}) {
            CHECK(boundary_cdf_inverse(*m, boundary_cdf_eval(*m, v)) == Approx(v).epsilon(1e-10));
        }
        // A(v) is the limit of Pr(V <= v | U <= p).
        CHECK(covar::copula::conditional_cdf_given_le(CopulaSpec::frank(3.0), v, 1e-9) ==
              Approx(boundary_cdf_eval(frank, v)).margin(1e-6));
        const CopulaSpec ips_star = covar::copula::reflect(CopulaSpec::ips(2.0), Reflection::Survival);
        CHECK(covar::copula::conditional_cdf_given_le(ips_star, v, 1e-9) ==
              Approx(boundary_cdf_eval(ips, v)).margin(1e-3));
    }
    CHECK(boundary_atoms(frank) == std::pair{0.0, 0.0});
    CHECK_THROWS_AS(boundary_cdf_eval(TailModel(Regime::Attraction, ModelFamily::ClaytonTDF, {1.0}), 0.5),
                    covar::WrongRegime);
}

TEST_CASE("regime and family must be compatible", "[tail]") {
    CHECK_THROWS_AS(TailModel(Regime::Balance, ModelFamily::ClaytonTDF, {1.0}), covar::InvalidArgument);
    CHECK_THROWS_AS(TailModel(Regime::Attraction, ModelFamily::FrankBoundary, {1.0}), covar::InvalidArgument);
    CHECK_THROWS_AS(TailModel(Regime::Mixed, ModelFamily::ClaytonTDF, {1.0}), covar::InvalidArgument);
    CHECK_THROWS_AS(TailModel(Regime::Attraction, ModelFamily::StudentTTDF, {0.5}), covar::InvalidArgument);
    CHECK(parse_model_family("frank") == ModelFamily::FrankBoundary);
    CHECK(parse_regime("Mixed") == Regime::Mixed);
}

TEST_CASE("catalog rows: regimes, tail orders and asymptotic levels", "[tail][catalog]") {
    struct Row {
        CatalogRow row;
        double param;
        Regime regime;
    };
    for (const auto& [row, param, regime] :
         {Row{CatalogRow::Clayton, 1.0, Regime::Attraction}, Row{CatalogRow::GumbelSurvival, 2.0, Regime::Attraction},
          Row{CatalogRow::IPSSurvival, 2.0, Regime::Balance}, Row{CatalogRow::Frank, 1.0, Regime::Balance},
          Row{CatalogRow::ClaytonReflect2, 0.5, Regime::Repulsion}}) {
        INFO(to_string(row));
        const RegimeInfo info = theoretical_regime(catalog_copula(row, param));
        CHECK(info.regime == regime);
        CHECK(info.kappa == Approx(catalog_kappa(row, param)));
    }
    const RegimeInfo g2 = theoretical_regime(catalog_copula(CatalogRow::GumbelReflect2, 2.0));
    CHECK(g2.kappa == Approx(3.0));
    CHECK(g2.expansion_not_uniform);
    CHECK(theoretical_regime(CopulaSpec::student_t(0.5, 4.0)).regime == Regime::Mixed);
    CHECK(theoretical_regime(CopulaSpec::gaussian(0.5)).expansion_not_uniform);

    // Clayton: v(p|p) = p^2 / (1 - p + p^2) exactly.
    for (double p : {1e-2, 1e-3, 1e-4}) {
        const double ratio = covar::copula::v_exact(catalog_copula(CatalogRow::Clayton, 1.0), p, p) /
                             table1_vp(CatalogRow::Clayton, 1.0, p);
        CHECK(ratio == Approx(1.0 / (1.0 - p + p * p)).epsilon(1e-7));
    }
    // Fixed q: v(q|p) / (p H^{-1}(q)) -> 1.
    const TailModel h(Regime::Attraction, ModelFamily::ClaytonTDF, {1.0});
    for (double q : {0.25, 0.5, 0.75}) {
        CHECK(table1_v_qp(CatalogRow::Clayton, 1.0, q, 1e-4) == Approx(1e-4 * H_inverse(h, q)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(table1_vp(CatalogRow::IPSSurvival, 1.0, 0.01), covar::BranchBoundary);
    CHECK_THROWS_AS(table1_vp(CatalogRow::ClaytonReflect2, 1.0, 0.01), covar::BranchBoundary);
    CHECK_THROWS_AS(catalog_copula(CatalogRow::GumbelSurvival, 0.9), covar::InvalidArgument);
    CHECK(parse_catalog_row("gumbel*") == CatalogRow::GumbelSurvival);
}

TEST_CASE("Delta-CoVaR limits", "[tail][limits]") {
    LimitInputs in;
    in.kappa = 2.0;
    in.xi = 0.0;
    CHECK(delta_covar_limit(in).value == 0.0);
    in.kappa = 1.0;
    in.gamma = 1.0;
    CHECK(delta_covar_limit(in).value == Approx(-1.0));
    in.kappa = 2.0;
    in.xi = 0.5;
    in.a0 = 1.0;
    CHECK(delta_covar_limit(in).value == 0.0);
    in.a0.reset();
    CHECK_THROWS_AS(delta_covar_limit(in), covar::InvalidArgument);

    // Light tail: one-sided limits at kappa = 2 agree with the value there.
    LimitInputs light;
    light.gamma = 2.5;
    light.rho_exp = 1.5;
    for (double h : {1e-6, 1e-9, 1e-13}) {
        light.kappa = 2.0 - h;
        CHECK(std::fabs(delta_covar_limit(light).value) < 1e-12 + 10 * h);
        light.kappa = 2.0 + h;
        CHECK(std::fabs(delta_covar_limit(light).value) < 1e-12 + 10 * h);
    }
    LimitInputs inf;
    inf.kappa = 1.5;
    inf.gamma = std::numeric_limits<double>::infinity();
    const DeltaCovarLimit d = delta_covar_limit(inf);
    CHECK(d.gamma_infinite);
    CHECK(d.value == -std::numeric_limits<double>::infinity());

    LimitInputs r;
    r.kappa = 1.5;
    CHECK(vp_rate(r).exponent == Approx(1.5));
    r.kappa = 2.5;
    r.rho_exp = 1.0;
    CHECK(vp_rate(r).exponent == Approx(0.5));
    r.kappa = 3.5;
    CHECK(vp_rate(r).tends_to_one);
    CHECK_THROWS_AS(delta_covar_limit(r), covar::InvalidArgument);
}
