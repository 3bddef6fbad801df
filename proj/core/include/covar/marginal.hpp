#pragma once

// AR(1)-GARCH(1,1) filtering with standardized skew-t innovations.
//
//   r_t = mu_t + sigma_t z_t,  mu_t = mu + phi r_{t-1},
//   sigma_t^2 = beta0 + beta1 eps_{t-1}^2 + beta2 sigma_{t-1}^2,  eps_t = r_t - mu_t.
//
// The skew-t is Hansen's: two scaled Student-t halves glued at -a/b with zero
// mean and unit variance for eta > 2, |lambda| < 1.

#include <cstdint>
#include <span>
#include <vector>

#include "covar/numerics.hpp"

namespace covar::marginal {

/// Hansen standardized skew-t with the normalizing constants computed once.
class SkewT {
public:
    SkewT(double eta, double lambda_skew);

    double logpdf(double z) const;
    double cdf(double z) const;
    double quantile(double q) const;

private:
    double eta_;
    double lambda_;
    double a_ = 0.0;
    double b_ = 0.0;
    double log_bc_ = 0.0;
    double scale_ = 0.0;
};

double skewt_logpdf(double z, double eta, double lambda_skew);
double skewt_pdf(double z, double eta, double lambda_skew);
double skewt_cdf(double z, double eta, double lambda_skew);
double skewt_quantile(double q, double eta, double lambda_skew);

struct ArGarchParams {
    double mu = 0.0;
    double phi = 0.0;
    double beta0 = 1.0;
    double beta1 = 0.0;
    double beta2 = 0.0;
    double eta = 8.0;
    double lambda_skew = 0.0;

    /// Throws InvalidArgument when outside the model domain.
    void validate() const;
};

struct FilterResult {
    std::vector<double> z;
    std::vector<double> cond_mean;
    std::vector<double> cond_sd;
    double next_mean = 0.0;  // one-step-ahead conditional moments
    double next_sd = 0.0;
};

struct MarginalFit {
    ArGarchParams params;
    std::vector<double> innovations;
    std::vector<double> cond_mean;
    std::vector<double> cond_sd;
    double next_mean = 0.0;
    double next_sd = 0.0;
    double loglik = 0.0;
    bool non_stationary = false;  // beta1 + beta2 at the stationarity edge
    bool constant_variance = false;  // the restricted beta1 = beta2 = 0 model was retained
    bool converged = false;
    int evaluations = 0;
};

inline constexpr std::size_t kMinObservations = 250;

/// Runs the recursion. Presample: sigma_1^2 = sample variance of r, r_0 = sample mean.
FilterResult filter(const ArGarchParams& params, std::span<const double> returns);

/// Skew-t quasi log-likelihood sum_t [log f(z_t) - log sigma_t].
double log_likelihood(const ArGarchParams& params, std::span<const double> returns);

struct MarginalFitOptions {
    numerics::MinimizeOptions minimize{.max_evaluations = 4000, .diameter_tol = 1e-6, .initial_step = 0.1,
                                       .restart_seed = 0x5eed, .restart = true};
    // With beta1 = 0 the likelihood is flat in beta2, so the constant-variance
    // model is also fitted and kept unless the likelihood ratio exceeds this
    // chi-square(2) 95% point. Zero disables the comparison.
    double variance_lr_critical = 5.991;
};

MarginalFit fit_ar_garch(std::span<const double> returns, const MarginalFitOptions& options = {});

/// mu_t + sigma_t Q(p). t ranges over [0, n]; t = n is the one-step-ahead forecast.
double var_forecast(const MarginalFit& fit, double p, std::size_t t);

/// Simulates n observations after discarding `burn_in` warm-up steps.
std::vector<double> simulate_ar_garch(const ArGarchParams& params, std::size_t n, std::uint64_t seed,
                                      std::size_t burn_in = 500);

/// Same recursion driven by supplied innovations z (e.g. from a copula sample).
/// The first `burn_in` innovations warm the recursion up and are dropped, so the
/// result has z.size() - burn_in entries.
std::vector<double> ar_garch_from_innovations(const ArGarchParams& params, std::span<const double> z,
                                              std::size_t burn_in);

}  // namespace covar::marginal
