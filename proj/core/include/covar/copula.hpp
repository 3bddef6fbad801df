#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace covar::copula {

enum class Family { Independence, Comonotone, Countermonotone, Clayton, Gumbel, Frank, StudentT, IPS, Gaussian };

/// The four reflections form the Klein four-group: each state records whether
/// the first and/or second coordinate has been flipped (u -> 1-u, v -> 1-v).
enum class Reflection { None, Survival, Reflect1, Reflect2 };

Reflection compose(Reflection a, Reflection b) noexcept;
bool flips_first(Reflection r) noexcept;
bool flips_second(Reflection r) noexcept;

std::string_view to_string(Family f) noexcept;
std::string_view to_string(Reflection r) noexcept;
Family parse_family(std::string_view name);
Reflection parse_reflection(std::string_view name);

/// Immutable parametric bivariate copula.
///
/// Parameters by family: Clayton {theta > 0}; Gumbel {delta >= 1};
/// Frank {theta != 0, |theta| <= 35}; StudentT {rho in (-1,1), nu > 0};
/// IPS {theta > 0}; Gaussian {rho in (-1,1)}; the three Frechet-bound
/// copulas and Independence take none. The IPS family is the Archimedean
/// copula built on the integrated positive stable Laplace transform; its
/// survival reflection carries the Gamma closed form used for the tail
/// balance regime.
class CopulaSpec {
public:
    CopulaSpec(Family family, std::vector<double> params, Reflection reflection = Reflection::None);

    static CopulaSpec independence();
    static CopulaSpec comonotone();
    static CopulaSpec countermonotone();
    static CopulaSpec clayton(double theta);
    static CopulaSpec gumbel(double delta);
    static CopulaSpec frank(double theta);
    static CopulaSpec student_t(double rho, double nu);
    static CopulaSpec ips(double theta);
    static CopulaSpec gaussian(double rho);

    Family family() const noexcept { return family_; }
    Reflection reflection() const noexcept { return reflection_; }
    std::span<const double> params() const noexcept { return params_; }
    double param(std::size_t i) const { return params_.at(i); }

    /// e.g. "clayton(theta=1)^2*".
    std::string describe() const;

    bool operator==(const CopulaSpec&) const = default;

private:
    Family family_;
    std::vector<double> params_;
    Reflection reflection_;
};

/// Applies a further reflection; reflect(reflect(c, r), r) == c.
CopulaSpec reflect(const CopulaSpec& c, Reflection kind);

/// C(u, v) including the reflection state. Student-t and Gaussian use
/// one-dimensional adaptive quadrature of the conditional cdf.
double copula_cdf(const CopulaSpec& c, double u, double v);

/// Pr(V <= v | U <= p) = C(p, v) / p.
double conditional_cdf_given_le(const CopulaSpec& c, double v, double p);

/// Copula-adjusted level: inf{v : C(p, v)/p >= q}.
double v_exact(const CopulaSpec& c, double q, double p);

struct UniformPairSample {
    std::vector<double> u;
    std::vector<double> v;
    std::uint64_t seed = 0;

    std::size_t size() const noexcept { return u.size(); }
};

/// n iid pairs from c, deterministic given the seed.
UniformPairSample sample(const CopulaSpec& c, std::size_t n, std::uint64_t seed);

}  // namespace covar::copula
