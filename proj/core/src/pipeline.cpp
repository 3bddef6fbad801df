#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "covar/errors.hpp"
#include "covar/parallel.hpp"
#include "covar/pipeline.hpp"

namespace covar::pipeline {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double innovation_quantile(const MarginalFit& fit, double level) {
    return marginal::skewt_quantile(level, fit.params.eta, fit.params.lambda_skew);
}

void check_level(double r_hat, double p, const char* op) {
    if (!(p > 0.0 && p < 1.0)) throw InvalidArgument(std::string(op) + ": p must lie in (0,1)");
    if (!(r_hat > 0.0) || !(r_hat * p < 1.0))
        throw InvalidArgument(std::string(op) + ": r_hat * p must lie in (0,1)");
}

// Quantile of the system series used to turn levels into CoVaR values.
struct SystemMarginal {
    std::function<double(double)> quantile;
    std::vector<double> mean;
    std::vector<double> sd;
};

SystemMarginal from_fit(const MarginalFit& fit) {
    const double eta = fit.params.eta;
    const double lambda = fit.params.lambda_skew;
    return {[eta, lambda](double q) { return marginal::skewt_quantile(q, eta, lambda); }, fit.cond_mean,
            fit.cond_sd};
}

// Left-continuous inverse of the empirical cdf: x_(ceil(n q)).
SystemMarginal pass_through(std::span<const double> x) {
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    SystemMarginal m;
    m.quantile = [sorted](double q) {
        const double n = static_cast<double>(sorted.size());
        const auto idx = static_cast<std::size_t>(std::max(1.0, std::ceil(n * q)));
        return sorted[std::min(idx, sorted.size()) - 1];
    };
    m.mean.assign(x.size(), 0.0);
    m.sd.assign(x.size(), 1.0);
    return m;
}

MarginalSummary summarize(const MarginalFit& fit) {
    return {fit.params.eta, fit.params.lambda_skew, fit.params.beta1 + fit.params.beta2, fit.loglik,
            fit.non_stationary};
}

std::vector<ModelFamily> candidates(Regime regime) {
    switch (regime) {
        case Regime::Attraction: return {ModelFamily::ReflectedGumbelTDF, ModelFamily::StudentTTDF};
        case Regime::Repulsion: return {ModelFamily::ClaytonTDF};
        case Regime::Balance: return {ModelFamily::ReflectedIPSBoundary, ModelFamily::FrankBoundary};
        case Regime::Mixed: return {ModelFamily::StudentTTDF};
    }
    return {};
}

void check_finite(std::span<const double> x, const char* name) {
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!std::isfinite(x[i]))
            throw DataError(std::string("non-finite ") + name + " value at offset " + std::to_string(i));
}

}  // namespace

double covar_t(const MarginalFit& fit_s, double r_hat, double p, std::size_t t) {
    check_level(r_hat, p, "covar_t");
    return marginal::var_forecast(fit_s, r_hat * p, t);
}

double delta_covar(const MarginalFit& fit_s, double r_hat, double p) {
    check_level(r_hat, p, "delta_covar");
    const double base = innovation_quantile(fit_s, p);
    if (base == 0.0) throw NumericError("delta_covar: innovation quantile at p is zero", p);
    return (innovation_quantile(fit_s, r_hat * p) - base) / std::fabs(base);
}

double delta_covar_exact(const MarginalFit& fit_s, double r_hat, double p, std::size_t t) {
    check_level(r_hat, p, "delta_covar_exact");
    const double var = marginal::var_forecast(fit_s, p, t);
    if (var == 0.0) throw NumericError("delta_covar_exact: VaR is zero", static_cast<double>(t));
    return (marginal::var_forecast(fit_s, r_hat * p, t) - var) / std::fabs(var);
}

std::string ReportFlags::to_string() const {
    std::string out;
    auto add = [&](bool on, const char* name) {
        if (!on) return;
        if (!out.empty()) out += '|';
        out += name;
    };
    add(clamp, "clamp");
    add(boundary, "boundary");
    add(non_stationary, "non_stationary");
    add(non_identified, "non_identified");
    add(fit_failed, "fit_failed");
    add(r_out_of_range, "r_out_of_range");
    return out.empty() ? "none" : out;
}

mde::MDEFit dispatch_fit(const empirical::PseudoSample& s, std::size_t k, Regime regime,
                         std::optional<ModelFamily> family_override, double tau, bool force) {
    mde::FitOptions options;
    options.tau = tau;
    options.force = force || family_override.has_value();
    const std::vector<ModelFamily> menu =
        family_override ? std::vector<ModelFamily>{*family_override} : candidates(regime);
    std::optional<mde::MDEFit> best;
    std::string errors;
    for (ModelFamily family : menu) {
        try {
            mde::MDEFit f = mde::fit(s, k, regime, family, options);
            const bool better =
                !best || f.criterion_value < best->criterion_value ||
                (f.criterion_value == best->criterion_value &&
                 tail::parameter_count(f.family) < tail::parameter_count(best->family));
            if (better) best = std::move(f);
        } catch (const std::exception& e) {
            if (!errors.empty()) errors += "; ";
            errors += std::string(tail::to_string(family)) + ": " + e.what();
        }
    }
    if (!best) throw OptimizationError("dispatch_fit: no candidate could be fitted (" + errors + ")");
    return *best;
}

CoVaRReport analyze_window(std::span<const double> returns_i, std::span<const double> returns_s,
                           const AnalysisConfig& config) {
    if (returns_i.size() != returns_s.size()) throw DataError("analyze_window: series differ in length");
    if (returns_i.size() < marginal::kMinObservations)
        throw DataError("window shorter than " + std::to_string(marginal::kMinObservations) + " observations");
    check_finite(returns_i, "institution");
    check_finite(returns_s, "system");

    CoVaRReport rep;
    std::vector<double> z_i;
    std::vector<double> z_s;
    SystemMarginal system;
    std::optional<MarginalFit> fit_s;
    if (config.marginal_mode == MarginalMode::ArGarch) {
        const MarginalFit fit_i = marginal::fit_ar_garch(returns_i);
        fit_s = marginal::fit_ar_garch(returns_s);
        z_i = fit_i.innovations;
        z_s = fit_s->innovations;
        rep.marginal_i = summarize(fit_i);
        rep.marginal_s = summarize(*fit_s);
        rep.flags.non_stationary = fit_i.non_stationary || fit_s->non_stationary;
        system = from_fit(*fit_s);
    } else {
        z_i.assign(returns_i.begin(), returns_i.end());
        z_s.assign(returns_s.begin(), returns_s.end());
        system = pass_through(returns_s);
    }

    const empirical::PseudoSample ps = empirical::pseudo_observations(z_i, z_s);
    const empirical::TailCoefficients tc = empirical::tail_coefficients(ps, config.k);
    rep.lambda_hat = tc.lambda_hat;
    rep.lambda_hat_2star = tc.lambda_hat_2star;
    rep.regime = config.regime_override.value_or(mde::classify_regime(tc, config.tau));

    const std::size_t n = returns_i.size();
    const double q_p = system.quantile(config.p);
    rep.var_t.resize(n);
    for (std::size_t t = 0; t < n; ++t) rep.var_t[t] = system.mean[t] + system.sd[t] * q_p;

    rep.r_hat = kNaN;
    rep.v_hat = kNaN;
    rep.delta_covar = kNaN;
    mde::MDEFit fit;
    try {
        fit = dispatch_fit(ps, config.k, rep.regime, config.family_override, config.tau);
    } catch (const std::exception& e) {
        rep.flags.fit_failed = true;
        rep.message = e.what();
        return rep;
    }
    rep.family = fit.family;
    rep.theta_hat = fit.theta_hat;
    rep.criterion = fit.criterion_value;
    rep.flags.boundary = fit.boundary;
    rep.flags.non_identified = fit.non_identified;

    try {
        const mde::AdjustmentFactor adj = mde::adjustment_factor(fit, config.p);
        rep.r_hat = adj.r_hat;
        rep.v_hat = adj.v_hat;
        rep.flags.clamp = adj.clamped;
    } catch (const std::exception& e) {
        rep.flags.r_out_of_range = true;
        rep.message = e.what();
        return rep;
    }
    const double level = rep.r_hat * config.p;
    if (!(level > 0.0 && level < 1.0)) {
        rep.flags.r_out_of_range = true;
        rep.message = "r_hat * p outside (0,1)";
        return rep;
    }
    const double q_rp = system.quantile(level);
    rep.covar_t.resize(n);
    for (std::size_t t = 0; t < n; ++t) rep.covar_t[t] = system.mean[t] + system.sd[t] * q_rp;
    if (q_p == 0.0) {
        rep.message = "degenerate denominator: quantile at p is zero";
    } else {
        rep.delta_covar = (q_rp - q_p) / std::fabs(q_p);
    }
    if (config.exact_delta) {
        rep.delta_covar_t.resize(n);
        for (std::size_t t = 0; t < n; ++t)
            rep.delta_covar_t[t] = (rep.covar_t[t] - rep.var_t[t]) / std::fabs(rep.var_t[t]);
    }
    return rep;
}

AnalysisResult rolling_analysis(std::span<const double> returns_i, std::span<const double> returns_s,
                                std::span<const std::string> dates, const AnalysisConfig& config) {
    const std::size_t n = returns_i.size();
    if (returns_s.size() != n) throw DataError("rolling_analysis: series differ in length");
    if (!dates.empty() && dates.size() != n) throw DataError("rolling_analysis: dates differ in length from series");
    if (config.window == 0 || config.step == 0) throw InvalidArgument("rolling_analysis: window and step must be >= 1");
    if (config.window > n)
        throw DataError("rolling_analysis: window of " + std::to_string(config.window) + " exceeds the " +
                        std::to_string(n) + " available observations");
    if (!(config.p > 0.0 && config.p < 1.0)) throw InvalidArgument("rolling_analysis: p must lie in (0,1)");

    std::vector<std::size_t> starts;
    for (std::size_t s = 0; s + config.window <= n; s += config.step) starts.push_back(s);

    std::vector<std::optional<CoVaRReport>> reports(starts.size());
    std::vector<std::string> reasons(starts.size());
    parallel_for(
        starts.size(),
        [&](std::size_t w) {
            const std::size_t a = starts[w];
            try {
                reports[w] = analyze_window(returns_i.subspan(a, config.window), returns_s.subspan(a, config.window),
                                            config);
            } catch (const std::exception& e) {
                reasons[w] = e.what();
            }
        },
        config.threads);

    AnalysisResult out;
    for (std::size_t w = 0; w < starts.size(); ++w) {
        const std::size_t a = starts[w];
        const std::size_t b = a + config.window;
        if (!reports[w]) {
            out.skipped.push_back({w, a, b, reasons[w]});
            continue;
        }
        CoVaRReport rep = std::move(*reports[w]);
        rep.window_id = w;
        rep.start_index = a;
        rep.end_index = b;
        if (!dates.empty()) {
            rep.start_date = dates[a];
            rep.end_date = dates[b - 1];
        }
        out.reports.push_back(std::move(rep));
    }
    return out;
}

}  // namespace covar::pipeline
