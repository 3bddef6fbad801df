#pragma once

// Minimum-distance estimation of tail models from pseudo-observations.
//
// Tail dependence criteria integrate over the simplex {w1 + w2 = 2}
// parameterized as w1 = 2t, w2 = 2(1 - t) with measure dt on (0,1). Boundary
// cdf criteria integrate over v in (0,1). Both use the midpoint rule.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "covar/empirical.hpp"
#include "covar/numerics.hpp"
#include "covar/tail_models.hpp"

namespace covar::mde {

using empirical::PseudoSample;
using empirical::TailCoefficients;
using tail::ModelFamily;
using tail::Regime;
using tail::TailModel;

inline constexpr double kDefaultTau = 0.1;

Regime classify_regime(const TailCoefficients& tc, double tau = kDefaultTau);

struct SimplexGrid {
    std::vector<double> t;
    std::vector<double> w1;
    std::vector<double> w2;
};

SimplexGrid simplex_grid(int panels = numerics::kDefaultPanels);

/// Model functionals on the quadrature grids.
std::vector<double> model_tdf_curve(const TailModel& m, int panels = numerics::kDefaultPanels);
std::vector<double> model_tdf2_curve(const TailModel& m, int panels = numerics::kDefaultPanels);
std::vector<double> model_boundary_curve(const TailModel& m, int panels = numerics::kDefaultPanels);

/// Mean absolute difference between an empirical curve and the model curve on
/// the same grid. These are the criteria with the empirical functional supplied
/// by the caller, which is how the self-test (model against itself) is run.
double tdf_distance(std::span<const double> empirical_curve, const TailModel& m,
                    int panels = numerics::kDefaultPanels);
double boundary_distance(std::span<const double> empirical_curve, const TailModel& m,
                         int panels = numerics::kDefaultPanels);
double mixed_distance(std::span<const double> lower_curve, std::span<const double> reflected_curve,
                      double rho, double nu, int panels = numerics::kDefaultPanels);

double criterion_attraction(const PseudoSample& s, std::size_t k, ModelFamily family,
                            std::span<const double> theta, int panels = numerics::kDefaultPanels);
double criterion_repulsion(const PseudoSample& s, std::size_t k, ModelFamily family,
                           std::span<const double> theta, int panels = numerics::kDefaultPanels);
double criterion_balance(const PseudoSample& s, std::size_t k, ModelFamily family,
                         std::span<const double> theta, int panels = numerics::kDefaultPanels);
double criterion_mixed(const PseudoSample& s, std::size_t k, double rho, double nu,
                       int panels = numerics::kDefaultPanels);

/// Parameter box searched for a family.
numerics::BoxConstraint family_box(ModelFamily family);

/// Deterministic starting points for the multi-start search.
std::vector<std::vector<double>> family_starts(ModelFamily family);

struct FitOptions {
    double tau = kDefaultTau;
    bool force = false;   // fit Attraction even when lambda_hat <= tau
    int panels = numerics::kDefaultPanels;
    unsigned threads = 1;
    numerics::MinimizeOptions minimize{};
};

struct MDEFit {
    Regime regime = Regime::Balance;
    ModelFamily family = ModelFamily::FrankBoundary;
    std::vector<double> theta_hat;
    double criterion_value = 0.0;
    std::size_t k = 0;
    std::size_t n = 0;
    bool boundary = false;        // estimate within 0.1% of the box width from a bound
    bool non_identified = false;  // criterion flat at every start
    int evaluations = 0;

    TailModel model() const { return TailModel(regime, family, theta_hat); }
};

MDEFit fit(const PseudoSample& s, std::size_t k, Regime regime, ModelFamily family,
           const FitOptions& options = {});

struct LevelEstimate {
    double value = 0.0;
    bool clamped = false;
};

/// Plug-in estimate of v(q|p).
LevelEstimate v_hat(const MDEFit& f, double q, double p);

struct AdjustmentFactor {
    double r_hat = 1.0;
    double v_hat = 0.0;
    double floor = 0.0;        // comonotone bound r = p
    double independence = 1.0;
    bool clamped = false;
};

/// r_hat(p) = v_hat(p|p)/p.
AdjustmentFactor adjustment_factor(const MDEFit& f, double p);

}  // namespace covar::mde
