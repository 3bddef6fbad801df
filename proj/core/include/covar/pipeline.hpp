#pragma once

// CoVaR and Delta-CoVaR under copula-linked AR-GARCH marginals, rolling-window
// analysis, and the Monte Carlo study driver.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "covar/copula.hpp"
#include "covar/empirical.hpp"
#include "covar/marginal.hpp"
#include "covar/mde.hpp"
#include "covar/tail_models.hpp"

namespace covar::pipeline {

using marginal::MarginalFit;
using tail::ModelFamily;
using tail::Regime;

/// mu_t + sigma_t Q(r_hat p) for the system series.
double covar_t(const MarginalFit& fit_s, double r_hat, double p, std::size_t t);

/// (Q(r_hat p) - Q(p)) / |Q(p)| with the fitted innovation quantile Q.
double delta_covar(const MarginalFit& fit_s, double r_hat, double p);

/// Per-day (CoVaR_t - VaR_t) / |VaR_t| without the zero-mean approximation.
double delta_covar_exact(const MarginalFit& fit_s, double r_hat, double p, std::size_t t);

enum class MarginalMode {
    ArGarch,      // AR(1)-GARCH(1,1) skew-t filter on each series
    PassThrough,  // raw values used as innovations; empirical quantiles of the system series
};

struct AnalysisConfig {
    std::size_t window = 1250;
    std::size_t step = 250;
    double p = 0.05;
    std::size_t k = empirical::kDefaultK;
    double tau = mde::kDefaultTau;
    MarginalMode marginal_mode = MarginalMode::ArGarch;
    bool exact_delta = false;
    std::optional<Regime> regime_override;
    std::optional<ModelFamily> family_override;
    unsigned threads = 1;
};

struct MarginalSummary {
    double eta = 0.0;
    double lambda_skew = 0.0;
    double beta_sum = 0.0;
    double loglik = 0.0;
    bool non_stationary = false;
};

struct ReportFlags {
    bool clamp = false;
    bool boundary = false;
    bool non_stationary = false;
    bool non_identified = false;
    bool fit_failed = false;
    bool r_out_of_range = false;

    bool any() const noexcept {
        return clamp || boundary || non_stationary || non_identified || fit_failed || r_out_of_range;
    }
    /// '|'-joined flag names, or "none".
    std::string to_string() const;
};

struct CoVaRReport {
    std::size_t window_id = 0;
    std::size_t start_index = 0;
    std::size_t end_index = 0;  // exclusive
    std::string start_date;
    std::string end_date;
    Regime regime = Regime::Balance;
    std::optional<ModelFamily> family;
    std::vector<double> theta_hat;
    double criterion = 0.0;
    double lambda_hat = 0.0;
    double lambda_hat_2star = 0.0;
    double r_hat = 1.0;
    double v_hat = 0.0;
    double delta_covar = 0.0;
    std::vector<double> var_t;
    std::vector<double> covar_t;
    std::vector<double> delta_covar_t;  // filled when exact_delta is set
    MarginalSummary marginal_i;
    MarginalSummary marginal_s;
    ReportFlags flags;
    std::string message;
};

struct SkippedWindow {
    std::size_t window_id = 0;
    std::size_t start_index = 0;
    std::size_t end_index = 0;
    std::string reason;
};

struct AnalysisResult {
    std::vector<CoVaRReport> reports;
    std::vector<SkippedWindow> skipped;
};

/// Fits the tail model for the given pseudo-sample following the regime
/// dispatch (lowest criterion wins within a regime, ties to fewer parameters).
mde::MDEFit dispatch_fit(const empirical::PseudoSample& s, std::size_t k, Regime regime,
                         std::optional<ModelFamily> family_override, double tau, bool force = false);

/// Analysis of one window of aligned returns.
CoVaRReport analyze_window(std::span<const double> returns_i, std::span<const double> returns_s,
                           const AnalysisConfig& config);

AnalysisResult rolling_analysis(std::span<const double> returns_i, std::span<const double> returns_s,
                                std::span<const std::string> dates, const AnalysisConfig& config);

// ---------------------------------------------------------------------------
// Monte Carlo study
// ---------------------------------------------------------------------------

struct KRule {
    enum class Kind { Fixed, SqrtMultiple, Fraction };
    Kind kind = Kind::SqrtMultiple;
    double value = 2.0;

    std::size_t k_for(std::size_t n) const;
    std::string describe() const;
};

struct SimStudyConfig {
    copula::CopulaSpec copula = copula::CopulaSpec::independence();
    std::optional<tail::TailModel> truth;  // tail model the copula implies; enables estimation
    std::optional<tail::CatalogRow> catalog_row;
    double catalog_param = 0.0;
    std::vector<std::size_t> n_grid;
    std::size_t reps = 0;
    KRule k_rule;
    std::vector<double> p_levels;
    std::vector<double> q_levels;
    std::uint64_t seed = 0;
    bool fit = true;
    bool deterministic_only = false;
    unsigned threads = 1;
};

struct SimRecord {
    std::size_t n = 0;
    std::size_t rep = 0;
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::string metric;
    double value = 0.0;
};

struct TheoryRatio {
    double p = 0.0;
    double v_exact = 0.0;
    double table1_vp = 0.0;
    double ratio = 0.0;
};

struct SummaryQuantiles {
    std::size_t n = 0;
    std::string metric;
    double q10 = 0.0;
    double median = 0.0;
    double q90 = 0.0;
};

struct SimStudyResult {
    std::string copula;
    std::vector<std::size_t> n_grid;
    std::string k_rule;
    std::size_t reps = 0;
    std::uint64_t seed = 0;
    std::vector<SimRecord> records;
    std::vector<TheoryRatio> theory;
    std::vector<SummaryQuantiles> summary;
};

/// The tail model implied by a catalog row, when the row has one.
std::optional<tail::TailModel> catalog_truth(tail::CatalogRow row, double param);

SimStudyResult simulate_study(const SimStudyConfig& config);

/// Quantile of a sample with linear interpolation (type 7).
double sample_quantile(std::vector<double> values, double prob);

}  // namespace covar::pipeline
