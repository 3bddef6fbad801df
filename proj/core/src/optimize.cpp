#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "covar/errors.hpp"
#include "covar/numerics.hpp"

namespace covar::numerics {

BoxConstraint::BoxConstraint(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size() || lower_.empty())
        throw InvalidArgument("BoxConstraint: lower and upper must be non-empty and of equal length");
    for (std::size_t i = 0; i < lower_.size(); ++i) {
        if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]) || !(lower_[i] < upper_[i]))
            throw InvalidArgument("BoxConstraint: require finite lower[i] < upper[i]");
    }
}

bool BoxConstraint::contains(std::span<const double> x) const {
    if (x.size() != dim()) return false;
    for (std::size_t i = 0; i < dim(); ++i)
        if (!(x[i] >= lower_[i] && x[i] <= upper_[i])) return false;
    return true;
}

std::vector<double> BoxConstraint::project(std::span<const double> x) const {
    std::vector<double> out(x.begin(), x.end());
    for (std::size_t i = 0; i < dim(); ++i) out[i] = std::clamp(out[i], lower_[i], upper_[i]);
    return out;
}

bool BoxConstraint::on_boundary(std::span<const double> x, double rel) const {
    for (std::size_t i = 0; i < dim(); ++i) {
        const double slack = rel * width(i);
        if (x[i] - lower_[i] <= slack || upper_[i] - x[i] <= slack) return true;
    }
    return false;
}

namespace {

using Point = std::vector<double>;

class SimplexRun {
public:
    SimplexRun(const Objective& objective, const BoxConstraint& box, const MinimizeOptions& opt,
               double reference_value)
        : objective_(objective), box_(box), opt_(opt), reference_(reference_value) {}

    double eval(const Point& x) {
        ++evaluations_;
        const double v = objective_(x);
        if (v != reference_) moved_ = true;
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    }

    // Runs Nelder-Mead from the given initial vertices (already inside the box).
    void run(std::vector<Point> simplex) {
        const std::size_t n = box_.dim();
        std::vector<double> fx(simplex.size());
        for (std::size_t j = 0; j < simplex.size(); ++j) fx[j] = eval(simplex[j]);
        int budget_used = static_cast<int>(simplex.size());
        std::vector<std::size_t> order(simplex.size());
        converged_ = false;

        auto project = [&](Point p) { return box_.project(p); };

        while (true) {
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
            {
                std::vector<Point> s2;
                std::vector<double> f2;
                for (auto idx : order) {
                    s2.push_back(simplex[idx]);
                    f2.push_back(fx[idx]);
                }
                simplex.swap(s2);
                fx.swap(f2);
            }
            if (fx[0] < best_value_) {
                best_value_ = fx[0];
                best_ = simplex[0];
            }
            double diameter = 0.0;
            for (std::size_t j = 1; j <= n; ++j)
                for (std::size_t i = 0; i < n; ++i)
                    diameter = std::max(diameter, std::fabs(simplex[j][i] - simplex[0][i]));
            if (diameter < opt_.diameter_tol) {
                converged_ = true;
                break;
            }
            if (budget_used >= opt_.max_evaluations) break;

            Point centroid(n, 0.0);
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[j][i] / static_cast<double>(n);
            auto along = [&](double t) {
                Point p(n);
                for (std::size_t i = 0; i < n; ++i) p[i] = centroid[i] + t * (simplex[n][i] - centroid[i]);
                return project(std::move(p));
            };

            const Point xr = along(-1.0);
            const double fr = eval(xr);
            ++budget_used;
            if (fr < fx[0]) {
                const Point xe = along(-2.0);
                const double fe = eval(xe);
                ++budget_used;
                if (fe < fr) { simplex[n] = xe; fx[n] = fe; }
                else { simplex[n] = xr; fx[n] = fr; }
                continue;
            }
            if (fr < fx[n - 1]) {
                simplex[n] = xr;
                fx[n] = fr;
                continue;
            }
            const bool outside = fr < fx[n];
            const Point xc = along(outside ? -0.5 : 0.5);
            const double fc = eval(xc);
            ++budget_used;
            if (fc < (outside ? fr : fx[n])) {
                simplex[n] = xc;
                fx[n] = fc;
                continue;
            }
            // Shrink towards the best vertex.
            for (std::size_t j = 1; j <= n; ++j) {
                for (std::size_t i = 0; i < n; ++i)
                    simplex[j][i] = simplex[0][i] + 0.5 * (simplex[j][i] - simplex[0][i]);
                fx[j] = eval(simplex[j]);
                ++budget_used;
            }
        }
    }

    const Point& best() const { return best_; }
    double best_value() const { return best_value_; }
    int evaluations() const { return evaluations_; }
    bool converged() const { return converged_; }
    bool moved() const { return moved_; }

private:
    const Objective& objective_;
    const BoxConstraint& box_;
    const MinimizeOptions& opt_;
    double reference_;
    Point best_;
    double best_value_ = std::numeric_limits<double>::infinity();
    int evaluations_ = 0;
    bool converged_ = false;
    bool moved_ = false;
};

std::vector<Point> axis_simplex(const Point& x0, const BoxConstraint& box, std::span<const double> steps) {
    std::vector<Point> simplex{x0};
    for (std::size_t i = 0; i < box.dim(); ++i) {
        Point v = x0;
        double step = steps[i];
        if (v[i] + step > box.upper()[i]) step = -step;
        v[i] = std::clamp(v[i] + step, box.lower()[i], box.upper()[i]);
        if (v[i] == x0[i]) v[i] = std::clamp(x0[i] - step, box.lower()[i], box.upper()[i]);
        simplex.push_back(std::move(v));
    }
    return simplex;
}

}  // namespace

MinimizeResult minimize_derivative_free(const Objective& objective, const BoxConstraint& box,
                                        std::span<const double> init, const MinimizeOptions& options) {
    if (init.size() != box.dim())
        throw InvalidArgument("minimize_derivative_free: init has wrong dimension");
    if (!box.contains(init)) throw InvalidArgument("minimize_derivative_free: init lies outside the box");
    const Point x0(init.begin(), init.end());
    const double f0 = objective(x0);
    if (std::isnan(f0)) throw InvalidArgument("minimize_derivative_free: objective is NaN at init");

    SimplexRun runner(objective, box, options, f0);
    std::vector<double> steps(box.dim());
    for (std::size_t i = 0; i < box.dim(); ++i) steps[i] = options.initial_step * box.width(i);
    runner.run(axis_simplex(x0, box, steps));

    if (options.restart) {
        std::mt19937_64 rng(options.restart_seed);
        std::uniform_real_distribution<double> scale(0.5, 1.5);
        std::bernoulli_distribution flip(0.5);
        for (std::size_t i = 0; i < box.dim(); ++i)
            steps[i] = options.initial_step * box.width(i) * scale(rng) * (flip(rng) ? -1.0 : 1.0);
        runner.run(axis_simplex(runner.best(), box, steps));
    }

    MinimizeResult result;
    result.evaluations = runner.evaluations() + 1;
    result.converged = runner.converged();
    if (!runner.moved()) {
        result.argmin = x0;
        result.value = f0;
        result.non_identified = true;
        return result;
    }
    if (std::isfinite(f0) && f0 <= runner.best_value()) {
        result.argmin = x0;
        result.value = f0;
    } else {
        result.argmin = runner.best();
        result.value = runner.best_value();
    }
    return result;
}

}  // namespace covar::numerics
