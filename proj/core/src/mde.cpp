#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "covar/errors.hpp"
#include "covar/mde.hpp"
#include "covar/parallel.hpp"

namespace covar::mde {
namespace {

double mean_abs_diff(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InvalidArgument("criterion: curve lengths differ");
    double sum = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = std::fabs(a[j] - b[j]);
        if (!std::isfinite(d)) throw NumericError("criterion: non-finite curve value", static_cast<double>(j));
        sum += d;
    }
    return sum / static_cast<double>(a.size());
}

std::vector<double> empirical_tdf_curve(const PseudoSample& s, std::size_t k, int panels) {
    const SimplexGrid g = simplex_grid(panels);
    return empirical::b_hat_curve(s, k, g.w1, g.w2);
}

std::vector<double> empirical_boundary_curve(const PseudoSample& s, std::size_t k, int panels) {
    const auto nodes = numerics::midpoint_nodes(panels);
    return empirical::A_hat_curve(s, k, nodes);
}

bool compatible(Regime regime, ModelFamily family) {
    switch (regime) {
        case Regime::Balance: return !tail::is_tdf_family(family);
        case Regime::Mixed: return family == ModelFamily::StudentTTDF;
        default: return tail::is_tdf_family(family);
    }
}

std::vector<double> to_vector(std::span<const double> x) { return {x.begin(), x.end()}; }

constexpr double kLowest = std::numeric_limits<double>::min();
constexpr double kHighest = 1.0 - 0x1.0p-53;

}  // namespace

Regime classify_regime(const TailCoefficients& tc, double tau) {
    const bool lower = tc.lambda_hat > tau;
    const bool upper = tc.lambda_hat_2star > tau;
    if (lower && upper) return Regime::Mixed;
    if (lower) return Regime::Attraction;
    if (upper) return Regime::Repulsion;
    return Regime::Balance;
}

SimplexGrid simplex_grid(int panels) {
    SimplexGrid g;
    g.t = numerics::midpoint_nodes(panels);
    g.w1.resize(g.t.size());
    g.w2.resize(g.t.size());
    for (std::size_t j = 0; j < g.t.size(); ++j) {
        g.w1[j] = 2.0 * g.t[j];
        g.w2[j] = 2.0 * (1.0 - g.t[j]);
    }
    return g;
}

std::vector<double> model_tdf_curve(const TailModel& m, int panels) {
    const SimplexGrid g = simplex_grid(panels);
    std::vector<double> out(g.t.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = tail::tdf_eval(m, g.w1[j], g.w2[j]);
    return out;
}

std::vector<double> model_tdf2_curve(const TailModel& m, int panels) {
    if (m.family() != ModelFamily::StudentTTDF) throw WrongRegime("model_tdf2_curve: requires a Student-t model");
    const TailModel flipped(Regime::Attraction, ModelFamily::StudentTTDF, {-m.params()[0], m.params()[1]});
    return model_tdf_curve(flipped, panels);
}

std::vector<double> model_boundary_curve(const TailModel& m, int panels) {
    const auto nodes = numerics::midpoint_nodes(panels);
    std::vector<double> out(nodes.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = tail::boundary_cdf_eval(m, nodes[j]);
    return out;
}

double tdf_distance(std::span<const double> empirical_curve, const TailModel& m, int panels) {
    return mean_abs_diff(empirical_curve, model_tdf_curve(m, panels));
}

double boundary_distance(std::span<const double> empirical_curve, const TailModel& m, int panels) {
    return mean_abs_diff(empirical_curve, model_boundary_curve(m, panels));
}

double mixed_distance(std::span<const double> lower_curve, std::span<const double> reflected_curve, double rho,
                      double nu, int panels) {
    const TailModel m(Regime::Mixed, ModelFamily::StudentTTDF, {rho, nu});
    return mean_abs_diff(lower_curve, model_tdf_curve(m, panels)) +
           mean_abs_diff(reflected_curve, model_tdf2_curve(m, panels));
}

double criterion_attraction(const PseudoSample& s, std::size_t k, ModelFamily family, std::span<const double> theta,
                            int panels) {
    const TailModel m(Regime::Attraction, family, to_vector(theta));
    return tdf_distance(empirical_tdf_curve(s, k, panels), m, panels);
}

double criterion_repulsion(const PseudoSample& s, std::size_t k, ModelFamily family, std::span<const double> theta,
                           int panels) {
    const TailModel m(Regime::Repulsion, family, to_vector(theta));
    return tdf_distance(empirical_tdf_curve(empirical::reflect_second(s), k, panels), m, panels);
}

double criterion_balance(const PseudoSample& s, std::size_t k, ModelFamily family, std::span<const double> theta,
                         int panels) {
    const TailModel m(Regime::Balance, family, to_vector(theta));
    return boundary_distance(empirical_boundary_curve(s, k, panels), m, panels);
}

double criterion_mixed(const PseudoSample& s, std::size_t k, double rho, double nu, int panels) {
    return mixed_distance(empirical_tdf_curve(s, k, panels),
                          empirical_tdf_curve(empirical::reflect_second(s), k, panels), rho, nu, panels);
}

numerics::BoxConstraint family_box(ModelFamily family) {
    switch (family) {
        case ModelFamily::ReflectedGumbelTDF: return {{1.01}, {15.0}};
        case ModelFamily::ClaytonTDF: return {{0.05}, {20.0}};
        case ModelFamily::StudentTTDF: return {{-0.99, 1.0}, {0.99, 50.0}};
        case ModelFamily::ReflectedIPSBoundary: return {{0.05}, {20.0}};
        case ModelFamily::FrankBoundary: return {{-35.0}, {35.0}};
    }
    throw InvalidArgument("family_box: unknown family");
}

std::vector<std::vector<double>> family_starts(ModelFamily family) {
    switch (family) {
        case ModelFamily::ReflectedGumbelTDF: return {{1.2}, {2.0}, {5.0}};
        case ModelFamily::ClaytonTDF: return {{0.5}, {2.0}, {8.0}};
        case ModelFamily::StudentTTDF: return {{0.0, 4.0}, {0.5, 4.0}, {0.3, 15.0}};
        case ModelFamily::ReflectedIPSBoundary: return {{0.5}, {1.5}, {4.0}};
        case ModelFamily::FrankBoundary: return {{-3.0}, {2.0}, {8.0}};
    }
    throw InvalidArgument("family_starts: unknown family");
}

MDEFit fit(const PseudoSample& s, std::size_t k, Regime regime, ModelFamily family, const FitOptions& options) {
    if (k < 1 || k > s.n)
        throw InvalidArgument("fit: k must lie in [1, n] (k = " + std::to_string(k) + ", n = " + std::to_string(s.n) +
                              ")");
    if (!compatible(regime, family))
        throw InvalidArgument("fit: family " + std::string(tail::to_string(family)) + " cannot model regime " +
                              std::string(tail::to_string(regime)));
    if (regime == Regime::Attraction && !options.force) {
        const TailCoefficients tc = empirical::tail_coefficients(s, k);
        if (tc.lambda_hat <= options.tau)
            throw WrongRegime("fit: lambda_hat = " + std::to_string(tc.lambda_hat) +
                              " does not exceed tau; Attraction refused unless forced");
    }

    const int panels = options.panels;
    std::vector<double> curve;
    std::vector<double> curve2;
    switch (regime) {
        case Regime::Attraction: curve = empirical_tdf_curve(s, k, panels); break;
        case Regime::Repulsion: curve = empirical_tdf_curve(empirical::reflect_second(s), k, panels); break;
        case Regime::Balance: curve = empirical_boundary_curve(s, k, panels); break;
        case Regime::Mixed:
            curve = empirical_tdf_curve(s, k, panels);
            curve2 = empirical_tdf_curve(empirical::reflect_second(s), k, panels);
            break;
    }

    const numerics::Objective objective = [&](std::span<const double> theta) {
        if (regime == Regime::Mixed) return mixed_distance(curve, curve2, theta[0], theta[1], panels);
        const TailModel m(regime, family, to_vector(theta));
        return regime == Regime::Balance ? boundary_distance(curve, m, panels) : tdf_distance(curve, m, panels);
    };

    const auto box = family_box(family);
    const auto starts = family_starts(family);
    std::vector<std::optional<numerics::MinimizeResult>> results(starts.size());
    std::vector<std::string> failures(starts.size());
    parallel_for(
        starts.size(),
        [&](std::size_t i) {
            try {
                results[i] = numerics::minimize_derivative_free(objective, box, starts[i], options.minimize);
            } catch (const std::exception& e) {
                failures[i] = e.what();
            }
        },
        options.threads);

    std::optional<std::size_t> best;
    bool all_flat = true;
    int evaluations = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (!results[i]) continue;
        evaluations += results[i]->evaluations;
        all_flat = all_flat && results[i]->non_identified;
        if (!best || results[i]->value < results[*best]->value) best = i;
    }
    if (!best) {
        std::string trace = "fit: every start failed";
        for (std::size_t i = 0; i < failures.size(); ++i) trace += "; start " + std::to_string(i) + ": " + failures[i];
        throw OptimizationError(trace);
    }

    MDEFit out;
    out.regime = regime;
    out.family = family;
    out.theta_hat = results[*best]->argmin;
    out.criterion_value = results[*best]->value;
    out.k = k;
    out.n = s.n;
    out.boundary = box.on_boundary(out.theta_hat);
    out.non_identified = all_flat;
    out.evaluations = evaluations;
    return out;
}

LevelEstimate v_hat(const MDEFit& f, double q, double p) {
    if (!(q > 0.0 && q < 1.0)) throw InvalidArgument("v_hat: q must lie in (0,1)");
    if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("v_hat: p must lie in (0,1)");
    const TailModel m = f.model();
    double v = 0.0;
    switch (f.regime) {
        case Regime::Attraction: v = tail::H_inverse(m, q) * p; break;
        case Regime::Repulsion: v = 1.0 - tail::H_inverse(m, 1.0 - q) * p; break;
        case Regime::Balance: v = tail::boundary_cdf_inverse(m, q); break;
        case Regime::Mixed: {
            const double q_star = tail::b_infinity(m);
            const double half_width = 0.5 / numerics::kDefaultPanels;
            if (std::fabs(q - q_star) <= half_width) v = 0.5;
            else if (q < q_star) v = tail::H_inverse(m, q) * p;
            else v = 1.0 - tail::H2_inverse(m, 1.0 - q) * p;
            break;
        }
    }
    LevelEstimate out;
    out.value = std::clamp(v, kLowest, kHighest);
    out.clamped = out.value != v;
    return out;
}

AdjustmentFactor adjustment_factor(const MDEFit& f, double p) {
    const LevelEstimate v = v_hat(f, p, p);
    AdjustmentFactor out;
    out.v_hat = v.value;
    out.r_hat = v.value / p;
    out.floor = p;
    out.independence = 1.0;
    out.clamped = v.clamped;
    return out;
}

}  // namespace covar::mde
