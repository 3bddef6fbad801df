#pragma once

// Numerical substrate: special functions, monotone root finding, quadrature
// and bounded derivative-free minimization. Everything here is a pure
// function of its arguments.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace covar::numerics {

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

/// Regularized lower incomplete gamma P(shape, x).
double reg_incomplete_gamma(double shape, double x);

/// Regularized upper incomplete gamma Q(shape, x) = 1 - P(shape, x), computed
/// without cancellation.
double reg_incomplete_gamma_upper(double shape, double x);

/// Inverse of P(shape, .) in x, accurate to 1e-12 on the probability scale.
double reg_incomplete_gamma_inv(double shape, double q);

/// Regularized incomplete beta I_x(a, b).
double reg_incomplete_beta(double a, double b, double x);

double student_t_pdf(double x, double df);
double student_t_cdf(double x, double df);
double student_t_quantile(double q, double df);

double normal_pdf(double x);
double normal_cdf(double x);
double normal_quantile(double q);

// ---------------------------------------------------------------------------
// Root finding and quadrature
// ---------------------------------------------------------------------------

using ScalarFn = std::function<double(double)>;

/// Generalized inverse of a nondecreasing function: smallest x in [lo, hi]
/// with f(x) >= 0, located by Illinois false position with bisection
/// fallback until the bracket is narrower than
/// `tol + rel_tol * |x|`. Flat zero segments resolve to their left endpoint.
/// Throws BracketError unless f(lo) <= 0 <= f(hi).
double find_root_monotone(const ScalarFn& f, double lo, double hi, double tol,
                          double rel_tol = 0.0);

inline constexpr int kDefaultPanels = 201;

/// Composite midpoint rule on (0,1). Throws NumericError on a non-finite value.
double integrate_unit_interval(const ScalarFn& f, int panels = kDefaultPanels);

/// Midpoint abscissae (j + 1/2) / panels used by integrate_unit_interval.
std::vector<double> midpoint_nodes(int panels = kDefaultPanels);

/// Adaptive Gauss-Kronrod (7/15) quadrature on a finite interval.
double integrate_adaptive(const ScalarFn& f, double a, double b, double abs_tol = 1e-14,
                          double rel_tol = 1e-11, int max_depth = 40);

// ---------------------------------------------------------------------------
// Derivative-free minimization
// ---------------------------------------------------------------------------

/// Axis-aligned parameter box. lower[i] < upper[i], all finite.
class BoxConstraint {
public:
    BoxConstraint(std::vector<double> lower, std::vector<double> upper);

    std::size_t dim() const noexcept { return lower_.size(); }
    const std::vector<double>& lower() const noexcept { return lower_; }
    const std::vector<double>& upper() const noexcept { return upper_; }

    bool contains(std::span<const double> x) const;
    std::vector<double> project(std::span<const double> x) const;
    double width(std::size_t i) const { return upper_[i] - lower_[i]; }

    /// True if x[i] lies within `rel * width(i)` of either bound.
    bool on_boundary(std::span<const double> x, double rel = 1e-3) const;

private:
    std::vector<double> lower_;
    std::vector<double> upper_;
};

using Objective = std::function<double(std::span<const double>)>;

struct MinimizeOptions {
    int max_evaluations = 2000;      // per simplex run
    double diameter_tol = 1e-6;
    double initial_step = 0.1;       // fraction of the box width
    std::uint64_t restart_seed = 0x5eed;
    bool restart = true;
};

struct MinimizeResult {
    std::vector<double> argmin;
    double value = 0.0;
    int evaluations = 0;
    bool converged = false;       // simplex diameter fell below tolerance
    bool non_identified = false;  // objective never moved away from its initial value
};

/// Nelder-Mead simplex with projection onto the box, followed by one seeded
/// random restart around the incumbent. Deterministic given init and seed.
MinimizeResult minimize_derivative_free(const Objective& objective, const BoxConstraint& box,
                                        std::span<const double> init,
                                        const MinimizeOptions& options = {});

}  // namespace covar::numerics
