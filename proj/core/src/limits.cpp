#include <array>
#include <cmath>
#include <limits>

#include "covar/errors.hpp"
#include "covar/tail_models.hpp"

namespace covar::tail {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void validate(const LimitInputs& in) {
    if (!(in.kappa >= 1.0) || !std::isfinite(in.kappa)) throw InvalidArgument("limits: kappa must be >= 1");
    if (!(in.rho_exp > 0.0) || !std::isfinite(in.rho_exp)) throw InvalidArgument("limits: rho_exp must be > 0");
    if (!(in.xi >= 0.0) || !std::isfinite(in.xi)) throw InvalidArgument("limits: xi must be >= 0");
    if (!(in.gamma > 0.0)) throw InvalidArgument("limits: gamma must be > 0");
}

// Tail orders at the four corners of the unreflected copula, indexed
// [first coordinate upper][second coordinate upper].
using Corners = std::array<std::array<double, 2>, 2>;

Corners corner_orders(const copula::CopulaSpec& c) {
    using copula::Family;
    const auto p = c.params();
    switch (c.family()) {
        case Family::Independence: return {{{2.0, 2.0}, {2.0, 2.0}}};
        case Family::Comonotone: return {{{1.0, kInf}, {kInf, 1.0}}};
        case Family::Countermonotone: return {{{kInf, 1.0}, {1.0, kInf}}};
        case Family::Clayton: return {{{1.0, p[0] + 2.0}, {p[0] + 2.0, 2.0}}};
        case Family::Gumbel: {
            if (p[0] == 1.0) return {{{2.0, 2.0}, {2.0, 2.0}}};
            const double ll = std::pow(2.0, 1.0 / p[0]);
            return {{{ll, 1.0 + p[0]}, {1.0 + p[0], 1.0}}};
        }
        case Family::Frank: return {{{2.0, 2.0}, {2.0, 2.0}}};
        case Family::StudentT: return {{{1.0, 1.0}, {1.0, 1.0}}};
        case Family::Gaussian: {
            const double same = 2.0 / (1.0 + p[0]);
            const double cross = 2.0 / (1.0 - p[0]);
            return {{{same, cross}, {cross, same}}};
        }
        case Family::IPS: {
            // The closed form is the survival copula; its lower corner has order 1 + 1/theta.
            const double ll = std::pow(2.0, 1.0 / p[0]);
            return {{{ll, 2.0}, {2.0, 1.0 + 1.0 / p[0]}}};
        }
    }
    return {{{2.0, 2.0}, {2.0, 2.0}}};
}

}  // namespace

RateResult vp_rate(const LimitInputs& in) {
    validate(in);
    RateResult out;
    if (in.kappa <= 2.0) {
        out.exponent = 3.0 - in.kappa;
    } else if (in.kappa < 2.0 + in.rho_exp) {
        out.exponent = 1.0 - (in.kappa - 2.0) / in.rho_exp;
    } else {
        out.exponent = kNaN;
        out.tends_to_one = true;
    }
    return out;
}

DeltaCovarLimit delta_covar_limit(const LimitInputs& in) {
    validate(in);
    if (in.kappa >= 2.0 + in.rho_exp)
        throw InvalidArgument("delta_covar_limit: requires kappa < 2 + rho_exp");
    DeltaCovarLimit out;
    out.rate_exponent = kNaN;
    const double k = in.kappa;
    if (in.xi > 0.0) {
        if (k < 2.0) {
            out.value = -kInf;
            out.divergent = true;
            out.rate_exponent = -(2.0 - k) * in.xi;
            out.label = "heavy tail, kappa < 2: diverges to -infinity";
        } else if (k == 2.0) {
            if (!in.a0) throw InvalidArgument("delta_covar_limit: a0 is required when kappa = 2 and xi > 0");
            if (!(*in.a0 > 0.0)) throw InvalidArgument("delta_covar_limit: a0 must be positive");
            out.value = 1.0 - std::pow(*in.a0, -in.xi);
            out.label = "heavy tail, kappa = 2";
        } else {
            out.value = 1.0;
            out.rate_exponent = (k - 2.0) * in.xi / in.rho_exp;
            out.label = "heavy tail, kappa > 2: tends to 1";
        }
        return out;
    }
    const bool gamma_inf = std::isinf(in.gamma);
    out.gamma_infinite = gamma_inf;
    if (k < 2.0) {
        out.value = gamma_inf ? -kInf : 1.0 - std::pow(3.0 - k, in.gamma);
        out.divergent = gamma_inf;
        out.label = "light tail, kappa < 2";
    } else if (k == 2.0) {
        out.value = 0.0;
        out.label = "light tail, kappa = 2";
    } else {
        out.value = gamma_inf ? 1.0 : 1.0 - std::pow(1.0 - (k - 2.0) / in.rho_exp, in.gamma);
        out.label = "light tail, kappa > 2";
    }
    if (gamma_inf) out.label += " (gamma = infinity)";
    return out;
}

RegimeInfo theoretical_regime(const copula::CopulaSpec& c) {
    using copula::Family;
    const Corners orders = corner_orders(c);
    const int f1 = copula::flips_first(c.reflection()) ? 1 : 0;
    const int f2 = copula::flips_second(c.reflection()) ? 1 : 0;
    RegimeInfo info;
    info.kappa = orders[f1][f2];
    info.kappa_2star = orders[f1][1 - f2];
    if (info.kappa == 1.0 && info.kappa_2star > 1.0) info.regime = Regime::Attraction;
    else if (info.kappa > 1.0 && info.kappa_2star == 1.0) info.regime = Regime::Repulsion;
    else if (info.kappa == 1.0 && info.kappa_2star == 1.0) info.regime = Regime::Mixed;
    else info.regime = Regime::Balance;
    // The lower corner of the unreflected Gumbel copula and the Gaussian copula
    // have tail expansions that are not uniform away from the diagonal.
    const bool gumbel_lower = c.family() == Family::Gumbel && f1 == 0;
    info.expansion_not_uniform = gumbel_lower || c.family() == Family::Gaussian;
    return info;
}

}  // namespace covar::tail
