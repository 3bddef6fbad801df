#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

#include "covar/errors.hpp"
#include "covar/numerics.hpp"
#include "covar/tail_models.hpp"

namespace covar::tail {
namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw InvalidArgument(msg);
}

// Stable forms with n = min(w1, w2), m = max(w1, w2).
double gumbel_tdf(double w1, double w2, double delta) {
    const double n = std::min(w1, w2);
    const double m = std::max(w1, w2);
    return n - m * std::expm1(std::log1p(std::pow(n / m, delta)) / delta);
}

double clayton_tdf(double w1, double w2, double theta) {
    const double n = std::min(w1, w2);
    const double m = std::max(w1, w2);
    return n * std::exp(-std::log1p(std::pow(n / m, theta)) / theta);
}

double student_t_tdf(double w1, double w2, double rho, double nu) {
    const double k = std::sqrt((nu + 1.0) / (1.0 - rho * rho));
    const double t1 = numerics::student_t_cdf(k * (rho - std::pow(w2 / w1, -1.0 / nu)), nu + 1.0);
    const double t2 = numerics::student_t_cdf(k * (rho - std::pow(w1 / w2, -1.0 / nu)), nu + 1.0);
    return w1 * t1 + w2 * t2;
}

double student_t_b_inf(double rho, double nu) {
    return numerics::student_t_cdf(rho * std::sqrt((nu + 1.0) / (1.0 - rho * rho)), nu + 1.0);
}

void require_tdf(const TailModel& m, const char* op) {
    if (m.regime() == Regime::Balance)
        throw WrongRegime(std::string(op) + ": Balance models carry no tail dependence function");
}

double tdf_with(const TailModel& m, double w1, double w2, double sign) {
    if (!(w1 >= 0.0) || !(w2 >= 0.0) || !std::isfinite(w1) || !std::isfinite(w2))
        throw InvalidArgument("tdf_eval: weights must be finite and nonnegative");
    if (w1 == 0.0 || w2 == 0.0) return 0.0;
    const auto& p = m.params();
    switch (m.family()) {
        case ModelFamily::ReflectedGumbelTDF: return gumbel_tdf(w1, w2, p[0]);
        case ModelFamily::ClaytonTDF: return clayton_tdf(w1, w2, p[0]);
        case ModelFamily::StudentTTDF: return student_t_tdf(w1, w2, sign * p[0], p[1]);
        default: break;
    }
    throw WrongRegime("tdf_eval: family has no tail dependence function");
}

double b_inf_with(const TailModel& m, double sign) {
    const auto& p = m.params();
    switch (m.family()) {
        case ModelFamily::ReflectedGumbelTDF: return p[0] > 1.0 ? 1.0 : 0.0;
        case ModelFamily::ClaytonTDF: return 1.0;
        case ModelFamily::StudentTTDF: return student_t_b_inf(sign * p[0], p[1]);
        default: break;
    }
    throw WrongRegime("b_infinity: family has no tail dependence function");
}

double invert_h(const TailModel& m, double q, double sign) {
    if (!(q > 0.0)) throw InvalidArgument("H_inverse: q must be positive");
    const double b_inf = b_inf_with(m, sign);
    if (q >= b_inf) throw OutOfRange("H_inverse: level not reachable by the tail model", b_inf);
    auto h = [&](double r) { return tdf_with(m, 1.0, r, sign) - q; };
    double lo = 1e-8;
    double hi = 1.0;
    while (h(lo) > 0.0) {
        lo *= 0.5;
        if (lo < 1e-300) return lo;
    }
    while (h(hi) < 0.0) {
        hi *= 2.0;
        if (hi > 1e12) throw OutOfRange("H_inverse: level too close to b_inf for the search bracket", b_inf);
    }
    return numerics::find_root_monotone(h, lo, hi, 1e-300, 1e-14);
}

}  // namespace

std::string_view to_string(Regime r) noexcept {
    switch (r) {
        case Regime::Attraction: return "attraction";
        case Regime::Repulsion: return "repulsion";
        case Regime::Balance: return "balance";
        case Regime::Mixed: return "mixed";
    }
    return "balance";
}

std::string_view to_string(ModelFamily f) noexcept {
    switch (f) {
        case ModelFamily::ReflectedGumbelTDF: return "reflected_gumbel_tdf";
        case ModelFamily::ClaytonTDF: return "clayton_tdf";
        case ModelFamily::StudentTTDF: return "student_t_tdf";
        case ModelFamily::ReflectedIPSBoundary: return "reflected_ips_boundary";
        case ModelFamily::FrankBoundary: return "frank_boundary";
    }
    return "unknown";
}

Regime parse_regime(std::string_view name) {
    const std::string s = lower(name);
    for (Regime r : {Regime::Attraction, Regime::Repulsion, Regime::Balance, Regime::Mixed})
        if (s == to_string(r)) return r;
    throw InvalidArgument("unknown regime '" + std::string(name) + "'");
}

ModelFamily parse_model_family(std::string_view name) {
    const std::string s = lower(name);
    for (ModelFamily f : {ModelFamily::ReflectedGumbelTDF, ModelFamily::ClaytonTDF, ModelFamily::StudentTTDF,
                          ModelFamily::ReflectedIPSBoundary, ModelFamily::FrankBoundary})
        if (s == to_string(f)) return f;
    if (s == "gumbel") return ModelFamily::ReflectedGumbelTDF;
    if (s == "clayton") return ModelFamily::ClaytonTDF;
    if (s == "student_t" || s == "t") return ModelFamily::StudentTTDF;
    if (s == "ips") return ModelFamily::ReflectedIPSBoundary;
    if (s == "frank") return ModelFamily::FrankBoundary;
    throw InvalidArgument("unknown tail model family '" + std::string(name) + "'");
}

std::size_t parameter_count(ModelFamily f) noexcept {
    return f == ModelFamily::StudentTTDF ? 2 : 1;
}

bool is_tdf_family(ModelFamily f) noexcept {
    return f == ModelFamily::ReflectedGumbelTDF || f == ModelFamily::ClaytonTDF || f == ModelFamily::StudentTTDF;
}

TailModel::TailModel(Regime regime, ModelFamily family, std::vector<double> params)
    : regime_(regime), family_(family), params_(std::move(params)) {
    const std::string name(to_string(family_));
    require(params_.size() == parameter_count(family_), name + ": wrong number of parameters");
    for (double x : params_) require(std::isfinite(x), name + ": parameters must be finite");
    switch (family_) {
        case ModelFamily::ReflectedGumbelTDF: require(params_[0] >= 1.0, name + ": delta must be >= 1"); break;
        case ModelFamily::ClaytonTDF: require(params_[0] > 0.0, name + ": theta must be > 0"); break;
        case ModelFamily::StudentTTDF:
            require(params_[0] > -1.0 && params_[0] < 1.0, name + ": rho must lie in (-1,1)");
            require(params_[1] > 0.0, name + ": nu must be > 0");
            break;
        case ModelFamily::ReflectedIPSBoundary: require(params_[0] > 0.0, name + ": theta must be > 0"); break;
        case ModelFamily::FrankBoundary: require(std::fabs(params_[0]) <= 35.0, name + ": |theta| must be <= 35"); break;
    }
    const bool tdf = is_tdf_family(family_);
    switch (regime_) {
        case Regime::Balance: require(!tdf, name + ": Balance requires a boundary-cdf family"); break;
        case Regime::Mixed: require(family_ == ModelFamily::StudentTTDF, "Mixed regime requires student_t_tdf"); break;
        default: require(tdf, name + ": Attraction/Repulsion require a tail dependence function family"); break;
    }
}

std::string TailModel::describe() const {
    std::ostringstream os;
    os.precision(10);
    os << to_string(regime_) << '/' << to_string(family_) << '(';
    for (std::size_t i = 0; i < params_.size(); ++i) os << (i ? "," : "") << params_[i];
    os << ')';
    return os.str();
}

double tdf_eval(const TailModel& m, double w1, double w2) {
    require_tdf(m, "tdf_eval");
    return tdf_with(m, w1, w2, 1.0);
}

double H_eval(const TailModel& m, double r) {
    require_tdf(m, "H_eval");
    return tdf_with(m, 1.0, r, 1.0);
}

double b_infinity(const TailModel& m) {
    require_tdf(m, "b_infinity");
    return b_inf_with(m, 1.0);
}

double H_inverse(const TailModel& m, double q) {
    require_tdf(m, "H_inverse");
    return invert_h(m, q, 1.0);
}

double H2_eval(const TailModel& m, double r) {
    if (m.regime() != Regime::Mixed) throw WrongRegime("H2_eval: only Mixed models carry a second corner");
    return tdf_with(m, 1.0, r, -1.0);
}

double H2_inverse(const TailModel& m, double q) {
    if (m.regime() != Regime::Mixed) throw WrongRegime("H2_inverse: only Mixed models carry a second corner");
    return invert_h(m, q, -1.0);
}

double b_infinity_2star(const TailModel& m) {
    if (m.regime() != Regime::Mixed) throw WrongRegime("b_infinity_2star: only Mixed models carry a second corner");
    return b_inf_with(m, -1.0);
}

double boundary_cdf_eval(const TailModel& m, double v) {
    if (m.regime() != Regime::Balance) throw WrongRegime("boundary_cdf_eval: requires a Balance model");
    require(v >= 0.0 && v <= 1.0, "boundary_cdf_eval: v must lie in [0,1]");
    if (v == 0.0) return 0.0;
    if (v == 1.0) return 1.0;
    const double theta = m.params()[0];
    if (m.family() == ModelFamily::FrankBoundary) {
        if (std::fabs(theta) < 0.01) return v;
        return std::expm1(-theta * v) / std::expm1(-theta);
    }
    return -std::expm1(-numerics::reg_incomplete_gamma_inv(theta, v));
}

double boundary_cdf_inverse(const TailModel& m, double q) {
    if (m.regime() != Regime::Balance) throw WrongRegime("boundary_cdf_inverse: requires a Balance model");
    require(q >= 0.0 && q <= 1.0, "boundary_cdf_inverse: q must lie in [0,1]");
    if (q == 0.0) return 0.0;
    if (q == 1.0) return 1.0;
    const double theta = m.params()[0];
    if (m.family() == ModelFamily::FrankBoundary) {
        if (std::fabs(theta) < 0.01) return q;
        return -std::log1p(q * std::expm1(-theta)) / theta;
    }
    return numerics::reg_incomplete_gamma(theta, -std::log1p(-q));
}

std::pair<double, double> boundary_atoms(const TailModel& m) {
    switch (m.regime()) {
        case Regime::Attraction: return {b_inf_with(m, 1.0), 0.0};
        case Regime::Repulsion: return {0.0, b_inf_with(m, 1.0)};
        case Regime::Balance: return {0.0, 0.0};
        case Regime::Mixed: {
            const double q_star = b_inf_with(m, 1.0);
            return {q_star, 1.0 - q_star};
        }
    }
    return {0.0, 0.0};
}

// ---------------------------------------------------------------------------

std::string_view to_string(CatalogRow r) noexcept {
    switch (r) {
        case CatalogRow::Clayton: return "clayton";
        case CatalogRow::GumbelSurvival: return "gumbel*";
        case CatalogRow::IPSSurvival: return "ips*";
        case CatalogRow::Frank: return "frank";
        case CatalogRow::GumbelReflect2: return "gumbel2*";
        case CatalogRow::ClaytonReflect2: return "clayton2*";
    }
    return "unknown";
}

CatalogRow parse_catalog_row(std::string_view name) {
    const std::string s = lower(name);
    for (CatalogRow r : {CatalogRow::Clayton, CatalogRow::GumbelSurvival, CatalogRow::IPSSurvival, CatalogRow::Frank,
                         CatalogRow::GumbelReflect2, CatalogRow::ClaytonReflect2})
        if (s == to_string(r)) return r;
    if (s == "gumbel" || s == "gumbel_survival") return CatalogRow::GumbelSurvival;
    if (s == "ips" || s == "ips_survival") return CatalogRow::IPSSurvival;
    if (s == "gumbel_reflect2") return CatalogRow::GumbelReflect2;
    if (s == "clayton_reflect2") return CatalogRow::ClaytonReflect2;
    throw InvalidArgument("unknown catalog family '" + std::string(name) + "'");
}

namespace {

void check_catalog(CatalogRow row, double param) {
    require(std::isfinite(param), "catalog: parameter must be finite");
    switch (row) {
        case CatalogRow::GumbelSurvival:
        case CatalogRow::GumbelReflect2: require(param > 1.0, "catalog: gumbel rows need delta > 1"); break;
        case CatalogRow::Frank: require(param != 0.0 && std::fabs(param) <= 35.0, "catalog: frank needs theta != 0"); break;
        default: require(param > 0.0, "catalog: theta must be > 0"); break;
    }
}

void check_levels(double q, double p) {
    require(q > 0.0 && q < 1.0, "catalog: q must lie in (0,1)");
    require(p > 0.0 && p < 1.0, "catalog: p must lie in (0,1)");
}

}  // namespace

copula::CopulaSpec catalog_copula(CatalogRow row, double param) {
    check_catalog(row, param);
    using copula::CopulaSpec;
    using copula::Reflection;
    switch (row) {
        case CatalogRow::Clayton: return CopulaSpec::clayton(param);
        case CatalogRow::GumbelSurvival: return reflect(CopulaSpec::gumbel(param), Reflection::Survival);
        case CatalogRow::IPSSurvival: return reflect(CopulaSpec::ips(param), Reflection::Survival);
        case CatalogRow::Frank: return CopulaSpec::frank(param);
        case CatalogRow::GumbelReflect2: return reflect(CopulaSpec::gumbel(param), Reflection::Reflect2);
        case CatalogRow::ClaytonReflect2: return reflect(CopulaSpec::clayton(param), Reflection::Reflect2);
    }
    throw InvalidArgument("catalog_copula: unknown row");
}

double catalog_kappa(CatalogRow row, double param) {
    check_catalog(row, param);
    switch (row) {
        case CatalogRow::Clayton:
        case CatalogRow::GumbelSurvival: return 1.0;
        case CatalogRow::IPSSurvival: return 1.0 + 1.0 / param;
        case CatalogRow::Frank: return 2.0;
        case CatalogRow::GumbelReflect2: return 1.0 + param;
        case CatalogRow::ClaytonReflect2: return param + 2.0;
    }
    return 2.0;
}

double table1_v_qp(CatalogRow row, double param, double q, double p) {
    check_catalog(row, param);
    check_levels(q, p);
    switch (row) {
        case CatalogRow::Clayton: return p * std::pow(std::pow(q, -param) - 1.0, -1.0 / param);
        case CatalogRow::GumbelSurvival:
            return H_inverse(TailModel(Regime::Attraction, ModelFamily::ReflectedGumbelTDF, {param}), q) * p;
        case CatalogRow::IPSSurvival: return numerics::reg_incomplete_gamma(param, -std::log1p(-q));
        case CatalogRow::Frank: return -std::log1p(q * std::expm1(-param)) / param;
        case CatalogRow::GumbelReflect2:
            return -std::expm1(-std::pow(param * q, 1.0 / param) * std::pow(-std::log(p), 1.0 - 1.0 / param));
        case CatalogRow::ClaytonReflect2:
            return 1.0 - std::pow(std::pow(1.0 - q, -param) - 1.0, -1.0 / param) * p;
    }
    throw InvalidArgument("table1_v_qp: unknown row");
}

double table1_vp(CatalogRow row, double param, double p) {
    check_catalog(row, param);
    require(p > 0.0 && p < 1.0, "table1_vp: p must lie in (0,1)");
    switch (row) {
        case CatalogRow::Clayton:
        case CatalogRow::GumbelSurvival: return p * p;
        case CatalogRow::IPSSurvival:
            if (param == 1.0) throw BranchBoundary("table1_vp: ips* has distinct expressions for theta < 1 and theta > 1");
            if (param > 1.0) return std::pow(std::tgamma(param + 1.0), -1.0 / param) * std::pow(p, 2.0 - 1.0 / param);
            return std::pow(p, param) / std::tgamma(param + 1.0);
        case CatalogRow::Frank: return -std::expm1(-param) / param * p;
        case CatalogRow::GumbelReflect2:
            return std::pow(param * p, 1.0 / param) * std::pow(-std::log(p), 1.0 - 1.0 / param);
        case CatalogRow::ClaytonReflect2:
            if (param == 1.0)
                throw BranchBoundary("table1_vp: clayton2* has distinct expressions for theta < 1 and theta > 1");
            if (param > 1.0) return 1.0 - std::pow(param, -1.0 / param) * std::pow(p, 1.0 - 1.0 / param);
            return std::pow(p, 1.0 - param);
    }
    throw InvalidArgument("table1_vp: unknown row");
}

}  // namespace covar::tail
