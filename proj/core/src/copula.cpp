#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "covar/copula.hpp"
#include "covar/errors.hpp"
#include "covar/numerics.hpp"

namespace covar::copula {
namespace {

constexpr unsigned bits(Reflection r) noexcept {
    switch (r) {
        case Reflection::None: return 0u;
        case Reflection::Reflect1: return 1u;
        case Reflection::Reflect2: return 2u;
        case Reflection::Survival: return 3u;
    }
    return 0u;
}

constexpr Reflection from_bits(unsigned b) noexcept {
    switch (b & 3u) {
        case 1u: return Reflection::Reflect1;
        case 2u: return Reflection::Reflect2;
        case 3u: return Reflection::Survival;
        default: return Reflection::None;
    }
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw InvalidArgument(msg);
}

void validate(Family f, std::span<const double> p) {
    auto need = [&](std::size_t n) {
        require(p.size() == n, std::string(to_string(f)) + ": expected " + std::to_string(n) + " parameter(s)");
        for (double x : p) require(std::isfinite(x), std::string(to_string(f)) + ": parameters must be finite");
    };
    switch (f) {
        case Family::Independence:
        case Family::Comonotone:
        case Family::Countermonotone: need(0); break;
        case Family::Clayton: need(1); require(p[0] > 0.0, "clayton: theta must be > 0"); break;
        case Family::Gumbel: need(1); require(p[0] >= 1.0, "gumbel: delta must be >= 1"); break;
        case Family::Frank:
            need(1);
            require(p[0] != 0.0 && std::fabs(p[0]) <= 35.0, "frank: theta must be nonzero with |theta| <= 35");
            break;
        case Family::StudentT:
            need(2);
            require(p[0] > -1.0 && p[0] < 1.0, "student_t: rho must lie in (-1,1)");
            require(p[1] > 0.0, "student_t: nu must be > 0");
            break;
        case Family::IPS: need(1); require(p[0] > 0.0, "ips: theta must be > 0"); break;
        case Family::Gaussian: need(1); require(p[0] > -1.0 && p[0] < 1.0, "gaussian: rho must lie in (-1,1)"); break;
    }
}

// ---------------------------------------------------------------------------
// Unreflected closed forms. Arguments are strictly inside (0,1).
// ---------------------------------------------------------------------------

double clayton_cdf(double u, double v, double theta) {
    // u^-t + v^-t - 1 = a^-t (1 + a^t (b^-t - 1)) with a = min, b = max.
    const double a = std::min(u, v);
    const double b = std::max(u, v);
    const double t = std::pow(a, theta) * std::expm1(-theta * std::log(b));
    return a * std::exp(-std::log1p(t) / theta);
}

double gumbel_exponent(double u, double v, double delta) {
    return std::pow(std::pow(-std::log(u), delta) + std::pow(-std::log(v), delta), 1.0 / delta);
}

double gumbel_cdf(double u, double v, double delta) {
    return std::exp(-gumbel_exponent(u, v, delta));
}

double frank_cdf(double u, double v, double theta) {
    const double num = std::expm1(-theta * u) * std::expm1(-theta * v);
    return -std::log1p(num / std::expm1(-theta)) / theta;
}

// Copula of (Z1, Z2) via C(u,v) = int_0^a Pr(V <= b | U = s) ds, integrated on
// the probability scale so the integrand stays bounded.
template <class Quantile, class CondCdf>
double elliptical_cdf(double u, double v, Quantile&& quantile, CondCdf&& cond) {
    const double a = std::min(u, v);
    const double b = std::max(u, v);
    const double y = quantile(b);
    auto integrand = [&](double s) { return cond(quantile(s), y); };
    return numerics::integrate_adaptive(integrand, 0.0, a, 1e-16 * a, 1e-11);
}

double student_t_cdf2(double u, double v, double rho, double nu) {
    auto quantile = [nu](double s) { return numerics::student_t_quantile(s, nu); };
    const double scale = std::sqrt((nu + 1.0) / (1.0 - rho * rho));
    auto cond = [&](double x, double y) {
        return numerics::student_t_cdf(scale * (y - rho * x) / std::sqrt(nu + x * x), nu + 1.0);
    };
    return elliptical_cdf(u, v, quantile, cond);
}

double gaussian_cdf2(double u, double v, double rho) {
    auto quantile = [](double s) { return numerics::normal_quantile(s); };
    const double scale = 1.0 / std::sqrt(1.0 - rho * rho);
    auto cond = [&](double x, double y) { return numerics::normal_cdf(scale * (y - rho * x)); };
    return elliptical_cdf(u, v, quantile, cond);
}

// Survival IPS (the orientation with a closed form):
// C(u,v) = u + v - F_Gamma((x^t + y^t)^(1/t); t), x = F_Gamma^{-1}(u; t).
double ips_survival_cdf(double u, double v, double theta) {
    const double x = numerics::reg_incomplete_gamma_inv(theta, u);
    const double y = numerics::reg_incomplete_gamma_inv(theta, v);
    const double z = std::pow(std::pow(x, theta) + std::pow(y, theta), 1.0 / theta);
    // u + v - P(z) = (u + v - 1) + Q(z), written to keep precision for small u, v.
    const double value = (u < 0.5 && v < 0.5)
                             ? (u + v) - numerics::reg_incomplete_gamma(theta, z)
                             : (u + v - 1.0) + numerics::reg_incomplete_gamma_upper(theta, z);
    return std::clamp(value, std::max(0.0, u + v - 1.0), std::min(u, v));
}

// The orientation in which a family's closed form is written, relative to the
// canonical (unreflected) copula.
unsigned native_bits(Family f) noexcept {
    return f == Family::IPS ? bits(Reflection::Survival) : 0u;
}

double native_cdf(const CopulaSpec& c, double u, double v) {
    if (u <= 0.0 || v <= 0.0) return 0.0;
    if (u >= 1.0) return std::min(v, 1.0);
    if (v >= 1.0) return u;
    const auto p = c.params();
    switch (c.family()) {
        case Family::Independence: return u * v;
        case Family::Comonotone: return std::min(u, v);
        case Family::Countermonotone: return std::max(u + v - 1.0, 0.0);
        case Family::Clayton: return clayton_cdf(u, v, p[0]);
        case Family::Gumbel: return gumbel_cdf(u, v, p[0]);
        case Family::Frank: return frank_cdf(u, v, p[0]);
        case Family::StudentT: return student_t_cdf2(u, v, p[0], p[1]);
        case Family::Gaussian: return gaussian_cdf2(u, v, p[0]);
        case Family::IPS: return ips_survival_cdf(u, v, p[0]);
    }
    return 0.0;
}

// Reflection identities with cancellation-free forms where the closed form
// allows one.
double reflected_cdf(const CopulaSpec& c, unsigned b, double u, double v) {
    const auto p = c.params();
    switch (b) {
        case 0u: return native_cdf(c, u, v);
        case 1u: return v - native_cdf(c, 1.0 - u, v);
        case 2u:
            if (c.family() == Family::Clayton) {
                // u - C(u, 1-v) = -u expm1(-log1p(t)/theta), t = u^theta ((1-v)^-theta - 1).
                const double theta = p[0];
                const double t = std::pow(u, theta) * std::expm1(-theta * std::log1p(-v));
                return -u * std::expm1(-std::log1p(t) / theta);
            }
            if (c.family() == Family::Gumbel) {
                const double delta = p[0];
                const double s = std::pow(std::pow(-std::log(u), delta) + std::pow(-std::log1p(-v), delta),
                                          1.0 / delta);
                return -u * std::expm1(-s - std::log(u));
            }
            return u - native_cdf(c, u, 1.0 - v);
        case 3u:
            if (c.family() == Family::Gumbel) {
                const double delta = p[0];
                const double s = std::pow(std::pow(-std::log1p(-u), delta) + std::pow(-std::log1p(-v), delta),
                                          1.0 / delta);
                return (u + v) + std::expm1(-s);
            }
            return u + v - 1.0 + native_cdf(c, 1.0 - u, 1.0 - v);
    }
    return 0.0;
}

}  // namespace

Reflection compose(Reflection a, Reflection b) noexcept {
    return from_bits(bits(a) ^ bits(b));
}

bool flips_first(Reflection r) noexcept { return (bits(r) & 1u) != 0; }
bool flips_second(Reflection r) noexcept { return (bits(r) & 2u) != 0; }

std::string_view to_string(Family f) noexcept {
    switch (f) {
        case Family::Independence: return "independence";
        case Family::Comonotone: return "comonotone";
        case Family::Countermonotone: return "countermonotone";
        case Family::Clayton: return "clayton";
        case Family::Gumbel: return "gumbel";
        case Family::Frank: return "frank";
        case Family::StudentT: return "student_t";
        case Family::IPS: return "ips";
        case Family::Gaussian: return "gaussian";
    }
    return "unknown";
}

std::string_view to_string(Reflection r) noexcept {
    switch (r) {
        case Reflection::None: return "none";
        case Reflection::Survival: return "survival";
        case Reflection::Reflect1: return "reflect1";
        case Reflection::Reflect2: return "reflect2";
    }
    return "none";
}

Family parse_family(std::string_view name) {
    const std::string s = lower(name);
    for (Family f : {Family::Independence, Family::Comonotone, Family::Countermonotone, Family::Clayton,
                     Family::Gumbel, Family::Frank, Family::StudentT, Family::IPS, Family::Gaussian})
        if (s == to_string(f)) return f;
    if (s == "t" || s == "student-t" || s == "studentt") return Family::StudentT;
    if (s == "normal") return Family::Gaussian;
    throw InvalidArgument("unknown copula family '" + std::string(name) + "'");
}

Reflection parse_reflection(std::string_view name) {
    const std::string s = lower(name);
    if (s.empty() || s == "none") return Reflection::None;
    if (s == "survival" || s == "*") return Reflection::Survival;
    if (s == "reflect1" || s == "1*") return Reflection::Reflect1;
    if (s == "reflect2" || s == "2*") return Reflection::Reflect2;
    throw InvalidArgument("unknown reflection '" + std::string(name) + "'");
}

CopulaSpec::CopulaSpec(Family family, std::vector<double> params, Reflection reflection)
    : family_(family), params_(std::move(params)), reflection_(reflection) {
    validate(family_, params_);
}

CopulaSpec CopulaSpec::independence() { return {Family::Independence, {}}; }
CopulaSpec CopulaSpec::comonotone() { return {Family::Comonotone, {}}; }
CopulaSpec CopulaSpec::countermonotone() { return {Family::Countermonotone, {}}; }
CopulaSpec CopulaSpec::clayton(double theta) { return {Family::Clayton, {theta}}; }
CopulaSpec CopulaSpec::gumbel(double delta) { return {Family::Gumbel, {delta}}; }
CopulaSpec CopulaSpec::frank(double theta) { return {Family::Frank, {theta}}; }
CopulaSpec CopulaSpec::student_t(double rho, double nu) { return {Family::StudentT, {rho, nu}}; }
CopulaSpec CopulaSpec::ips(double theta) { return {Family::IPS, {theta}}; }
CopulaSpec CopulaSpec::gaussian(double rho) { return {Family::Gaussian, {rho}}; }

std::string CopulaSpec::describe() const {
    static constexpr const char* names[][2] = {{"", ""}, {"", ""}, {"", ""}, {"theta", ""},
                                                {"delta", ""}, {"theta", ""}, {"rho", "nu"},
                                                {"theta", ""}, {"rho", ""}};
    std::ostringstream os;
    os.precision(10);
    os << to_string(family_);
    if (!params_.empty()) {
        os << '(';
        for (std::size_t i = 0; i < params_.size(); ++i) {
            if (i) os << ',';
            os << names[static_cast<int>(family_)][i] << '=' << params_[i];
        }
        os << ')';
    }
    switch (reflection_) {
        case Reflection::None: break;
        case Reflection::Survival: os << '*'; break;
        case Reflection::Reflect1: os << "^1*"; break;
        case Reflection::Reflect2: os << "^2*"; break;
    }
    return os.str();
}

CopulaSpec reflect(const CopulaSpec& c, Reflection kind) {
    return CopulaSpec(c.family(), std::vector<double>(c.params().begin(), c.params().end()),
                      compose(c.reflection(), kind));
}

double copula_cdf(const CopulaSpec& c, double u, double v) {
    if (!(u >= 0.0 && u <= 1.0) || !(v >= 0.0 && v <= 1.0))
        throw InvalidArgument("copula_cdf: arguments must lie in [0,1]");
    if (u == 0.0 || v == 0.0) return 0.0;
    if (u == 1.0) return v;
    if (v == 1.0) return u;
    const unsigned b = bits(c.reflection()) ^ native_bits(c.family());
    const double value = reflected_cdf(c, b, u, v);
    // Frechet-Hoeffding bounds hold for every copula; clip rounding excursions.
    return std::clamp(value, std::max(0.0, u + v - 1.0), std::min(u, v));
}

double conditional_cdf_given_le(const CopulaSpec& c, double v, double p) {
    if (!(p > 0.0 && p <= 1.0)) throw InvalidArgument("conditional_cdf_given_le: p must lie in (0,1]");
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("conditional_cdf_given_le: v must lie in [0,1]");
    return copula_cdf(c, p, v) / p;
}

double v_exact(const CopulaSpec& c, double q, double p) {
    if (!(q > 0.0 && q < 1.0)) throw InvalidArgument("v_exact: q must lie in (0,1)");
    if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("v_exact: p must lie in (0,1)");
    auto g = [&](double v) { return copula_cdf(c, p, v) / p - q; };
    return numerics::find_root_monotone(g, 0.0, 1.0, 1e-15, 1e-13);
}

}  // namespace covar::copula
