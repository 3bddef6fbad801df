#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "covar/errors.hpp"
#include "covar/marginal.hpp"
#include "covar/random.hpp"

namespace covar::marginal {
namespace {

constexpr std::size_t kDim = 7;

struct Moments {
    double mean;
    double variance;
};

Moments sample_moments(std::span<const double> r) {
    const double n = static_cast<double>(r.size());
    const double mean = std::accumulate(r.begin(), r.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : r) ss += (x - mean) * (x - mean);
    return {mean, ss / n};
}

// Unconstrained coordinates -> model parameters.
// mu = mean + sd*x0, phi = tanh(x1), beta0 = var*exp(x2),
// (beta1, beta2) = (e^x3, e^x4) / (1 + e^x3 + e^x4), lambda = tanh(x5), eta = 2 + exp(x6).
ArGarchParams decode(std::span<const double> x, const Moments& m) {
    ArGarchParams p;
    p.mu = m.mean + std::sqrt(m.variance) * x[0];
    p.phi = std::tanh(x[1]);
    p.beta0 = m.variance * std::exp(x[2]);
    const double e1 = std::exp(x[3]);
    const double e2 = std::exp(x[4]);
    p.beta1 = e1 / (1.0 + e1 + e2);
    p.beta2 = e2 / (1.0 + e1 + e2);
    p.lambda_skew = std::tanh(x[5]);
    p.eta = 2.0 + std::exp(x[6]);
    return p;
}

std::array<double, kDim> initial_point() {
    // mu = mean, phi = 0, beta0 = 0.05 var, beta1 = 0.05, beta2 = 0.9, lambda = 0, eta = 8.
    return {0.0, 0.0, std::log(0.05), 0.0, std::log(18.0), 0.0, std::log(6.0)};
}

numerics::BoxConstraint search_box() {
    return {{-3.0, -3.0, -14.0, -12.0, -12.0, -2.5, std::log(0.2)},
            {3.0, 3.0, 1.0, 12.0, 12.0, 2.5, std::log(200.0)}};
}

// Constant-variance restriction: coordinates (x0, x1, x2, x5, x6) of the full model.
ArGarchParams decode_restricted(std::span<const double> x, const Moments& m) {
    const std::array<double, kDim> full{x[0], x[1], x[2], -40.0, -40.0, x[3], x[4]};
    ArGarchParams p = decode(full, m);
    p.beta1 = 0.0;
    p.beta2 = 0.0;
    return p;
}

numerics::BoxConstraint restricted_box() {
    const numerics::BoxConstraint b = search_box();
    return {{b.lower()[0], b.lower()[1], -3.0, b.lower()[5], b.lower()[6]}, {b.upper()[0], b.upper()[1], 3.0, b.upper()[5], b.upper()[6]}};
}

void check_returns(std::span<const double> r) {
    for (std::size_t i = 0; i < r.size(); ++i)
        if (!std::isfinite(r[i])) throw DataError("non-finite return at index " + std::to_string(i));
}

}  // namespace

void ArGarchParams::validate() const {
    const auto fail = [](const char* what) { throw InvalidArgument(std::string("ArGarchParams: ") + what); };
    for (double x : {mu, phi, beta0, beta1, beta2, eta, lambda_skew})
        if (!std::isfinite(x)) fail("parameters must be finite");
    if (!(std::fabs(phi) < 1.0)) fail("|phi| must be < 1");
    if (!(beta0 > 0.0)) fail("beta0 must be > 0");
    if (!(beta1 >= 0.0) || !(beta2 >= 0.0)) fail("beta1 and beta2 must be >= 0");
    if (!(beta1 + beta2 < 1.0)) fail("beta1 + beta2 must be < 1");
    if (!(eta > 2.0)) fail("eta must be > 2");
    if (!(lambda_skew > -1.0 && lambda_skew < 1.0)) fail("lambda_skew must lie in (-1,1)");
}

FilterResult filter(const ArGarchParams& params, std::span<const double> returns) {
    if (returns.size() < 2) throw DataError("filter: need at least 2 returns");
    check_returns(returns);
    const Moments m = sample_moments(returns);
    const std::size_t n = returns.size();
    FilterResult out;
    out.z.resize(n);
    out.cond_mean.resize(n);
    out.cond_sd.resize(n);
    double prev_r = m.mean;
    double prev_eps = 0.0;
    double prev_var = m.variance;
    for (std::size_t t = 0; t < n; ++t) {
        const double mean = params.mu + params.phi * prev_r;
        const double var = t == 0 ? m.variance
                                  : params.beta0 + params.beta1 * prev_eps * prev_eps + params.beta2 * prev_var;
        if (!(var > 0.0) || !std::isfinite(var))
            throw NumericError("filter: conditional variance is not positive", static_cast<double>(t));
        const double sd = std::sqrt(var);
        const double eps = returns[t] - mean;
        out.cond_mean[t] = mean;
        out.cond_sd[t] = sd;
        out.z[t] = eps / sd;
        prev_r = returns[t];
        prev_eps = eps;
        prev_var = var;
    }
    out.next_mean = params.mu + params.phi * prev_r;
    out.next_sd = std::sqrt(params.beta0 + params.beta1 * prev_eps * prev_eps + params.beta2 * prev_var);
    return out;
}

double log_likelihood(const ArGarchParams& params, std::span<const double> returns) {
    const Moments m = sample_moments(returns);
    const SkewT dist(params.eta, params.lambda_skew);
    double prev_r = m.mean;
    double prev_eps = 0.0;
    double prev_var = m.variance;
    double ll = 0.0;
    for (std::size_t t = 0; t < returns.size(); ++t) {
        const double mean = params.mu + params.phi * prev_r;
        const double var = t == 0 ? m.variance
                                  : params.beta0 + params.beta1 * prev_eps * prev_eps + params.beta2 * prev_var;
        if (!(var > 0.0) || !std::isfinite(var)) return -std::numeric_limits<double>::infinity();
        const double eps = returns[t] - mean;
        ll += dist.logpdf(eps / std::sqrt(var)) - 0.5 * std::log(var);
        prev_r = returns[t];
        prev_eps = eps;
        prev_var = var;
    }
    return ll;
}

MarginalFit fit_ar_garch(std::span<const double> returns, const MarginalFitOptions& options) {
    if (returns.size() < kMinObservations)
        throw DataError("fit_ar_garch: need at least " + std::to_string(kMinObservations) + " returns, got " +
                        std::to_string(returns.size()));
    check_returns(returns);
    const Moments m = sample_moments(returns);
    const auto [lo, hi] = std::minmax_element(returns.begin(), returns.end());
    if (*lo == *hi || !(m.variance > 0.0)) throw DataError("fit_ar_garch: returns have zero variance");

    const double n = static_cast<double>(returns.size());
    const numerics::Objective objective = [&](std::span<const double> x) {
        const double ll = log_likelihood(decode(x, m), returns);
        return std::isfinite(ll) ? -ll / n : std::numeric_limits<double>::infinity();
    };
    const auto init = initial_point();
    numerics::MinimizeResult res;
    try {
        res = numerics::minimize_derivative_free(objective, search_box(), init, options.minimize);
    } catch (const std::exception& e) {
        throw OptimizationError(std::string("fit_ar_garch: optimizer failed: ") + e.what());
    }
    if (!std::isfinite(res.value)) throw OptimizationError("fit_ar_garch: likelihood is not finite at the optimum");

    MarginalFit fit;
    fit.params = decode(res.argmin, m);
    if (options.variance_lr_critical > 0.0) {
        const numerics::Objective restricted = [&](std::span<const double> x) {
            const double ll = log_likelihood(decode_restricted(x, m), returns);
            return std::isfinite(ll) ? -ll / n : std::numeric_limits<double>::infinity();
        };
        const std::array<double, 5> start{res.argmin[0], res.argmin[1], 0.0, res.argmin[5], res.argmin[6]};
        numerics::MinimizeResult r0;
        try {
            r0 = numerics::minimize_derivative_free(restricted, restricted_box(), start, options.minimize);
        } catch (const std::exception&) {
            r0.value = std::numeric_limits<double>::infinity();
        }
        if (std::isfinite(r0.value) && 2.0 * n * (r0.value - res.value) < options.variance_lr_critical) {
            fit.params = decode_restricted(r0.argmin, m);
            fit.constant_variance = true;
            res.value = r0.value;
            res.evaluations += r0.evaluations;
            res.converged = r0.converged;
        }
    }
    const FilterResult f = filter(fit.params, returns);
    fit.innovations = f.z;
    fit.cond_mean = f.cond_mean;
    fit.cond_sd = f.cond_sd;
    fit.next_mean = f.next_mean;
    fit.next_sd = f.next_sd;
    fit.loglik = -res.value * n;
    fit.non_stationary = fit.params.beta1 + fit.params.beta2 >= 1.0 - 1e-4;
    fit.converged = res.converged;
    fit.evaluations = res.evaluations;
    return fit;
}

double var_forecast(const MarginalFit& fit, double p, std::size_t t) {
    if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("var_forecast: p must lie in (0,1)");
    const double q = skewt_quantile(p, fit.params.eta, fit.params.lambda_skew);
    const std::size_t n = fit.cond_mean.size();
    if (t < n) return fit.cond_mean[t] + fit.cond_sd[t] * q;
    if (t == n) return fit.next_mean + fit.next_sd * q;
    throw InvalidArgument("var_forecast: t beyond the one-step-ahead horizon");
}

std::vector<double> ar_garch_from_innovations(const ArGarchParams& params, std::span<const double> z,
                                              std::size_t burn_in) {
    params.validate();
    if (burn_in > z.size()) throw InvalidArgument("ar_garch_from_innovations: burn_in exceeds the innovations");
    double prev_r = params.mu / (1.0 - params.phi);
    double var = params.beta0 / (1.0 - params.beta1 - params.beta2);
    std::vector<double> out;
    out.reserve(z.size() - burn_in);
    for (std::size_t t = 0; t < z.size(); ++t) {
        const double mean = params.mu + params.phi * prev_r;
        const double r = mean + std::sqrt(var) * z[t];
        const double eps = r - mean;
        if (t >= burn_in) out.push_back(r);
        prev_r = r;
        var = params.beta0 + params.beta1 * eps * eps + params.beta2 * var;
    }
    return out;
}

std::vector<double> simulate_ar_garch(const ArGarchParams& params, std::size_t n, std::uint64_t seed,
                                      std::size_t burn_in) {
    params.validate();
    rng::Engine g(seed);
    const SkewT dist(params.eta, params.lambda_skew);
    std::vector<double> z(n + burn_in);
    for (double& x : z) x = dist.quantile(rng::open_uniform(g));
    return ar_garch_from_innovations(params, z, burn_in);
}

}  // namespace covar::marginal
