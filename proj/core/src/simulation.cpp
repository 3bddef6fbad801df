#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "covar/errors.hpp"
#include "covar/parallel.hpp"
#include "covar/pipeline.hpp"
#include "covar/random.hpp"

namespace covar::pipeline {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kSupGrid = 100;  // abscissae j/100, j = 1..99

std::string format_level(double q) {
    std::ostringstream os;
    os << q;
    return os.str();
}

double sup_error(const empirical::PseudoSample& ps, std::size_t k, const tail::TailModel& truth) {
    std::vector<double> grid;
    for (int j = 1; j < kSupGrid; ++j) grid.push_back(static_cast<double>(j) / kSupGrid);
    double sup = 0.0;
    if (truth.regime() == Regime::Balance) {
        const auto a = empirical::A_hat_curve(ps, k, grid);
        for (std::size_t j = 0; j < grid.size(); ++j)
            sup = std::max(sup, std::fabs(a[j] - tail::boundary_cdf_eval(truth, grid[j])));
        return sup;
    }
    std::vector<double> w1(grid.size());
    std::vector<double> w2(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        w1[j] = 2.0 * grid[j];
        w2[j] = 2.0 * (1.0 - grid[j]);
    }
    auto corner = [&](const empirical::PseudoSample& sample, double rho_sign) {
        const auto b = empirical::b_hat_curve(sample, k, w1, w2);
        std::vector<double> params = truth.params();
        if (rho_sign < 0.0) params[0] = -params[0];
        const tail::TailModel m(Regime::Attraction, truth.family(), params);
        double s = 0.0;
        for (std::size_t j = 0; j < grid.size(); ++j) s = std::max(s, std::fabs(b[j] - tail::tdf_eval(m, w1[j], w2[j])));
        return s;
    };
    switch (truth.regime()) {
        case Regime::Attraction: return corner(ps, 1.0);
        case Regime::Repulsion: return corner(empirical::reflect_second(ps), 1.0);
        case Regime::Mixed: return std::max(corner(ps, 1.0), corner(empirical::reflect_second(ps), -1.0));
        default: break;
    }
    return sup;
}

}  // namespace

std::size_t KRule::k_for(std::size_t n) const {
    double k = value;
    switch (kind) {
        case Kind::Fixed: k = value; break;
        case Kind::SqrtMultiple: k = std::ceil(value * std::sqrt(static_cast<double>(n))); break;
        case Kind::Fraction: k = std::ceil(value * static_cast<double>(n)); break;
    }
    if (!(k >= 1.0)) throw InvalidArgument("KRule: k must be >= 1");
    return std::min(static_cast<std::size_t>(k), n / 2);
}

std::string KRule::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::Fixed: os << "fixed:" << value; break;
        case Kind::SqrtMultiple: os << "sqrt:" << value; break;
        case Kind::Fraction: os << "fraction:" << value; break;
    }
    return os.str();
}

std::optional<tail::TailModel> catalog_truth(tail::CatalogRow row, double param) {
    using tail::CatalogRow;
    using tail::TailModel;
    switch (row) {
        case CatalogRow::Clayton: return TailModel(Regime::Attraction, ModelFamily::ClaytonTDF, {param});
        case CatalogRow::GumbelSurvival: return TailModel(Regime::Attraction, ModelFamily::ReflectedGumbelTDF, {param});
        case CatalogRow::IPSSurvival: return TailModel(Regime::Balance, ModelFamily::ReflectedIPSBoundary, {param});
        case CatalogRow::Frank: return TailModel(Regime::Balance, ModelFamily::FrankBoundary, {param});
        case CatalogRow::GumbelReflect2: return std::nullopt;
        case CatalogRow::ClaytonReflect2: return TailModel(Regime::Repulsion, ModelFamily::ClaytonTDF, {param});
    }
    return std::nullopt;
}

double sample_quantile(std::vector<double> values, double prob) {
    values.erase(std::remove_if(values.begin(), values.end(), [](double x) { return std::isnan(x); }), values.end());
    if (values.empty()) return kNaN;
    std::sort(values.begin(), values.end());
    const double h = prob * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

SimStudyResult simulate_study(const SimStudyConfig& config) {
    SimStudyResult result;
    result.copula = config.copula.describe();
    result.n_grid = config.n_grid;
    result.k_rule = config.k_rule.describe();
    result.reps = config.reps;
    result.seed = config.seed;

    if (config.catalog_row) {
        for (double p : config.p_levels) {
            TheoryRatio tr;
            tr.p = p;
            tr.v_exact = copula::v_exact(config.copula, p, p);
            tr.table1_vp = tail::table1_vp(*config.catalog_row, config.catalog_param, p);
            tr.ratio = tr.v_exact / tr.table1_vp;
            result.theory.push_back(tr);
        }
    }
    if (config.deterministic_only) return result;

    const std::size_t reps = config.reps;
    const std::size_t tasks = config.n_grid.size() * reps;
    std::vector<std::vector<SimRecord>> slots(tasks);
    parallel_for(
        tasks,
        [&](std::size_t task) {
            const std::size_t ni = task / reps;
            const std::size_t rep = task % reps;
            const std::size_t n = config.n_grid[ni];
            const std::size_t k = config.k_rule.k_for(n);
            const std::uint64_t seed = rng::derive_seed(config.seed, task);
            auto& out = slots[task];
            auto record = [&](std::string metric, double value) { out.push_back({n, rep, k, seed, std::move(metric), value}); };

            const copula::UniformPairSample sample = copula::sample(config.copula, n, seed);
            const empirical::PseudoSample ps = empirical::pseudo_observations(sample.u, sample.v);
            const empirical::TailCoefficients tc = empirical::tail_coefficients(ps, std::min(k, n));
            record("lambda_hat", tc.lambda_hat);
            record("lambda_hat_2star", tc.lambda_hat_2star);
            if (!config.truth) return;
            record("sup_err", sup_error(ps, k, *config.truth));
            if (!config.fit) return;

            std::optional<mde::MDEFit> fit;
            try {
                mde::FitOptions options;
                options.force = true;
                fit = mde::fit(ps, k, config.truth->regime(), config.truth->family(), options);
            } catch (const std::exception&) {
            }
            const std::size_t dim = tail::parameter_count(config.truth->family());
            for (std::size_t d = 0; d < dim; ++d)
                record(d == 0 ? "theta_hat" : "theta_hat_" + std::to_string(d + 1), fit ? fit->theta_hat[d] : kNaN);
            record("criterion", fit ? fit->criterion_value : kNaN);
            const double p_n = static_cast<double>(k) / static_cast<double>(n);
            for (double q : config.q_levels) {
                double ratio = kNaN;
                if (fit) {
                    try {
                        ratio = mde::v_hat(*fit, q, p_n).value / copula::v_exact(config.copula, q, p_n);
                    } catch (const std::exception&) {
                    }
                }
                record("v_ratio_q" + format_level(q), ratio);
            }
        },
        config.threads);

    for (auto& slot : slots)
        for (auto& r : slot) result.records.push_back(std::move(r));

    // Quantiles per (n, metric) in first-appearance order of metrics.
    std::vector<std::string> metrics;
    std::map<std::pair<std::size_t, std::string>, std::vector<double>> groups;
    for (const auto& r : result.records) {
        if (std::find(metrics.begin(), metrics.end(), r.metric) == metrics.end()) metrics.push_back(r.metric);
        groups[{r.n, r.metric}].push_back(r.value);
    }
    for (std::size_t n : config.n_grid) {
        for (const auto& m : metrics) {
            const auto it = groups.find({n, m});
            if (it == groups.end()) continue;
            result.summary.push_back({n, m, sample_quantile(it->second, 0.1), sample_quantile(it->second, 0.5),
                                      sample_quantile(it->second, 0.9)});
        }
    }
    return result;
}

}  // namespace covar::pipeline
