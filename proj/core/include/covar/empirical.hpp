#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace covar::empirical {

inline constexpr std::size_t kDefaultK = 100;

/// Rank-based pseudo-observations U_i = rank(x_i)/n. Ranks are kept alongside
/// (half-integers under ties) so that threshold comparisons are exact.
struct PseudoSample {
    std::vector<double> u;
    std::vector<double> v;
    std::vector<double> rank_u;
    std::vector<double> rank_v;
    std::size_t n = 0;

    std::size_t size() const noexcept { return n; }
    bool operator==(const PseudoSample&) const = default;
};

struct TailCoefficients {
    double lambda_hat = 0.0;
    double lambda_hat_2star = 0.0;
    std::size_t k = 0;
    std::size_t n = 0;
};

/// Average ranks (1-based) of the values.
std::vector<double> average_ranks(std::span<const double> x);

PseudoSample pseudo_observations(std::span<const double> x, std::span<const double> y);

/// Second coordinate replaced by (n + 1 - rank)/n.
PseudoSample reflect_second(const PseudoSample& s);

/// C_n(u, v) = n^-1 #{U_i <= u, V_i <= v}.
double empirical_copula(const PseudoSample& s, double u, double v);

/// A_hat(v) = k^-1 #{U_i <= k/n, V_i <= v}.
double A_hat(const PseudoSample& s, std::size_t k, double v);

/// b_hat(w1, w2) = k^-1 #{U_i <= k w1/n, V_i <= k w2/n}.
double b_hat(const PseudoSample& s, std::size_t k, double w1, double w2);

/// (b_hat(1,1) on the data, b_hat(1,1) on the 2-reflected data).
TailCoefficients tail_coefficients(const PseudoSample& s, std::size_t k);

/// A_hat evaluated at many abscissae in O(n + m log k).
std::vector<double> A_hat_curve(const PseudoSample& s, std::size_t k, std::span<const double> v);

/// b_hat evaluated at many weight pairs.
std::vector<double> b_hat_curve(const PseudoSample& s, std::size_t k, std::span<const double> w1,
                                std::span<const double> w2);

}  // namespace covar::empirical
