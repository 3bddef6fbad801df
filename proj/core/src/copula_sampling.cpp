#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "covar/copula.hpp"
#include "covar/errors.hpp"
#include "covar/numerics.hpp"
#include "covar/random.hpp"

namespace covar::copula {
namespace {

using rng::Engine;
using rng::open_uniform;

constexpr double kLowest = std::numeric_limits<double>::min();
constexpr double kHighest = 1.0 - 0x1.0p-53;

double open_clamp(double x) { return std::clamp(x, kLowest, kHighest); }

struct Pair {
    double u;
    double v;
};

Pair draw_clayton(Engine& g, double theta) {
    const double u = open_uniform(g);
    const double w = open_uniform(g);
    const double t = std::pow(w, -theta / (1.0 + theta)) - 1.0 + std::pow(u, theta);
    return {u, u * std::pow(t, -1.0 / theta)};
}

Pair draw_frank(Engine& g, double theta) {
    const double u = open_uniform(g);
    const double w = open_uniform(g);
    const double denom = w + (1.0 - w) * std::exp(-theta * u);
    return {u, -std::log1p(w * std::expm1(-theta) / denom) / theta};
}

// Marshall-Olkin with a positive stable frailty (Kanter's representation).
Pair draw_gumbel(Engine& g, double delta) {
    if (delta == 1.0) return {open_uniform(g), open_uniform(g)};
    const double alpha = 1.0 / delta;
    const double angle = std::numbers::pi * open_uniform(g);
    const double e = rng::standard_exponential(g);
    const double s = std::sin(alpha * angle) / std::pow(std::sin(angle), 1.0 / alpha) *
                     std::pow(std::sin((1.0 - alpha) * angle) / e, (1.0 - alpha) / alpha);
    const double e1 = rng::standard_exponential(g);
    const double e2 = rng::standard_exponential(g);
    return {std::exp(-std::pow(e1 / s, alpha)), std::exp(-std::pow(e2 / s, alpha))};
}

Pair draw_elliptical(Engine& g, double rho, double nu, bool student) {
    const double z1 = rng::standard_normal(g);
    const double z2 = rng::standard_normal(g);
    const double x1 = z1;
    const double x2 = rho * z1 + std::sqrt(1.0 - rho * rho) * z2;
    if (!student) return {numerics::normal_cdf(x1), numerics::normal_cdf(x2)};
    std::gamma_distribution<double> chi_half(0.5 * nu, 2.0);
    const double scale = std::sqrt(chi_half(g) / nu);
    return {numerics::student_t_cdf(x1 / scale, nu), numerics::student_t_cdf(x2 / scale, nu)};
}

// Rosenblatt inversion of the survival IPS closed form
// C(u,v) = u + v - P(theta, (x^theta + y^theta)^(1/theta)), with u = P(theta, x),
// v = P(theta, y). dC/du is approximated by a central difference in u and the
// conditional cdf is inverted over y, on which it is increasing.
class IpsConditional {
public:
    IpsConditional(double theta, double u) : theta_(theta) {
        const double h = std::min({1e-6, 0.5 * u, 0.5 * (1.0 - u)});
        step_ = 2.0 * h;
        x_minus_ = std::pow(numerics::reg_incomplete_gamma_inv(theta, u - h), theta);
        x_plus_ = std::pow(numerics::reg_incomplete_gamma_inv(theta, u + h), theta);
    }

    // Pr(V <= P(theta, y) | U = u).
    double operator()(double y) const {
        const double yt = std::pow(y, theta_);
        const double z_minus = std::pow(x_minus_ + yt, 1.0 / theta_);
        const double z_plus = std::pow(x_plus_ + yt, 1.0 / theta_);
        double mass;
        if (z_minus > theta_)
            mass = numerics::reg_incomplete_gamma_upper(theta_, z_minus) -
                   numerics::reg_incomplete_gamma_upper(theta_, z_plus);
        else
            mass = numerics::reg_incomplete_gamma(theta_, z_plus) - numerics::reg_incomplete_gamma(theta_, z_minus);
        return 1.0 - mass / step_;
    }

private:
    double theta_;
    double step_;
    double x_minus_;
    double x_plus_;
};

Pair draw_ips_survival(Engine& g, double theta) {
    const double u = open_uniform(g);
    const double w = open_uniform(g);
    const IpsConditional cond(theta, u);
    auto f = [&](double y) { return cond(y) - w; };
    double hi = std::max(1.0, 2.0 * theta);
    int guard = 0;
    while (f(hi) < 0.0 && guard++ < 200) hi *= 2.0;
    if (f(hi) < 0.0) return {u, kHighest};
    if (f(0.0) >= 0.0) return {u, kLowest};
    const double y = numerics::find_root_monotone(f, 0.0, hi, 1e-300, 1e-13);
    const double v = y > theta ? 1.0 - numerics::reg_incomplete_gamma_upper(theta, y)
                               : numerics::reg_incomplete_gamma(theta, y);
    return {u, v};
}

}  // namespace

UniformPairSample sample(const CopulaSpec& c, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw InvalidArgument("sample: n must be >= 1");
    Engine g(seed);
    UniformPairSample out;
    out.seed = seed;
    out.u.resize(n);
    out.v.resize(n);

    // Draw from the orientation in which the family has a closed form, then flip.
    bool flip_u = flips_first(c.reflection());
    bool flip_v = flips_second(c.reflection());
    if (c.family() == Family::IPS) {
        flip_u = !flip_u;
        flip_v = !flip_v;
    }
    const auto p = c.params();
    for (std::size_t i = 0; i < n; ++i) {
        Pair d{};
        switch (c.family()) {
            case Family::Independence: d = {open_uniform(g), open_uniform(g)}; break;
            case Family::Comonotone: d.u = open_uniform(g); d.v = d.u; break;
            case Family::Countermonotone: d.u = open_uniform(g); d.v = 1.0 - d.u; break;
            case Family::Clayton: d = draw_clayton(g, p[0]); break;
            case Family::Gumbel: d = draw_gumbel(g, p[0]); break;
            case Family::Frank: d = draw_frank(g, p[0]); break;
            case Family::StudentT: d = draw_elliptical(g, p[0], p[1], true); break;
            case Family::Gaussian: d = draw_elliptical(g, p[0], 0.0, false); break;
            case Family::IPS: d = draw_ips_survival(g, p[0]); break;
        }
        if (flip_u) d.u = 1.0 - d.u;
        if (flip_v) d.v = 1.0 - d.v;
        out.u[i] = open_clamp(d.u);
        out.v[i] = open_clamp(d.v);
    }
    return out;
}

}  // namespace covar::copula
