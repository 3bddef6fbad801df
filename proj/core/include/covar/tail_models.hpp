#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "covar/copula.hpp"

namespace covar::tail {

enum class Regime { Attraction, Repulsion, Balance, Mixed };

enum class ModelFamily {
    ReflectedGumbelTDF,    // b = w1 + w2 - (w1^d + w2^d)^(1/d), d >= 1
    ClaytonTDF,            // b = (w1^-t + w2^-t)^(-1/t), t > 0
    StudentTTDF,           // {rho, nu}
    ReflectedIPSBoundary,  // A(v) = 1 - exp(-F_Gamma^{-1}(v; t))
    FrankBoundary,         // A(v) = (1 - e^{-t v}) / (1 - e^{-t})
};

std::string_view to_string(Regime r) noexcept;
std::string_view to_string(ModelFamily f) noexcept;
Regime parse_regime(std::string_view name);
ModelFamily parse_model_family(std::string_view name);

/// Number of parameters a family carries.
std::size_t parameter_count(ModelFamily f) noexcept;

/// True for families that describe a tail dependence function b.
bool is_tdf_family(ModelFamily f) noexcept;

/// A parametric tail functional with its regime tag.
///
/// Attraction and Repulsion models carry a tail dependence function. For
/// Repulsion the function describes the lower-left corner of the 2-reflected
/// copula. Balance models carry a boundary cdf A. Mixed is Student-t only and
/// uses b(.;rho,nu) for the lower-left corner and b(.;-rho,nu) for the
/// reflected one.
class TailModel {
public:
    TailModel(Regime regime, ModelFamily family, std::vector<double> params);

    Regime regime() const noexcept { return regime_; }
    ModelFamily family() const noexcept { return family_; }
    const std::vector<double>& params() const noexcept { return params_; }

    std::string describe() const;

private:
    Regime regime_;
    ModelFamily family_;
    std::vector<double> params_;
};

/// b(w1, w2) of the model's corner.
double tdf_eval(const TailModel& m, double w1, double w2);

/// H(r) = b(1, r).
double H_eval(const TailModel& m, double r);

/// sup_r H(r).
double b_infinity(const TailModel& m);

/// Solves H(r) = q for r. Throws OutOfRange when q >= b_inf.
double H_inverse(const TailModel& m, double q);

/// For Mixed models: the reflected corner H*(r) = b(1, r; -rho, nu) and its inverse.
double H2_eval(const TailModel& m, double r);
double H2_inverse(const TailModel& m, double q);
double b_infinity_2star(const TailModel& m);

double boundary_cdf_eval(const TailModel& m, double v);
double boundary_cdf_inverse(const TailModel& m, double q);

/// Jump sizes (p0, p1) of the limiting conditional cdf at 0 and 1.
std::pair<double, double> boundary_atoms(const TailModel& m);

// ---------------------------------------------------------------------------
// Closed forms for the catalog families
// ---------------------------------------------------------------------------

enum class CatalogRow { Clayton, GumbelSurvival, IPSSurvival, Frank, GumbelReflect2, ClaytonReflect2 };

std::string_view to_string(CatalogRow r) noexcept;
CatalogRow parse_catalog_row(std::string_view name);

/// The exact copula a catalog row describes.
copula::CopulaSpec catalog_copula(CatalogRow row, double param);

/// Tail order kappa of the lower-left corner for a catalog row.
double catalog_kappa(CatalogRow row, double param);

/// Asymptotic v(q|p) for a catalog row.
double table1_v_qp(CatalogRow row, double param, double q, double p);

/// Asymptotic v(p) = v(p|p) for a catalog row. Throws BranchBoundary at theta = 1
/// for the IPS and 2-reflected Clayton rows.
double table1_vp(CatalogRow row, double param, double p);

// ---------------------------------------------------------------------------
// Limit calculators
// ---------------------------------------------------------------------------

struct LimitInputs {
    double kappa = 1.0;
    double rho_exp = 1.0;
    double xi = 0.0;
    double gamma = 1.0;  // may be +infinity
    std::optional<double> a0;
};

struct RateResult {
    double exponent = 0.0;     // v(p) = O(p^exponent); NaN when tends_to_one
    bool tends_to_one = false;
};

RateResult vp_rate(const LimitInputs& in);

struct DeltaCovarLimit {
    double value = 0.0;             // may be -infinity
    double rate_exponent = 0.0;     // NaN when the branch carries no rate
    bool divergent = false;
    bool gamma_infinite = false;    // flagged branch with gamma = infinity
    std::string label;
};

DeltaCovarLimit delta_covar_limit(const LimitInputs& in);

struct RegimeInfo {
    Regime regime = Regime::Balance;
    double kappa = 2.0;
    double kappa_2star = 2.0;
    bool expansion_not_uniform = false;
};

/// Regime implied by the tail orders of c and its 2-reflection.
RegimeInfo theoretical_regime(const copula::CopulaSpec& c);

}  // namespace covar::tail
