#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "covar/empirical.hpp"
#include "covar/errors.hpp"

namespace covar::empirical {
namespace {

void check_k(const PseudoSample& s, std::size_t k, const char* op) {
    if (k < 1 || k > s.n)
        throw InvalidArgument(std::string(op) + ": k must lie in [1, n] (k = " + std::to_string(k) +
                              ", n = " + std::to_string(s.n) + ")");
}

void check_weights(const PseudoSample& s, std::size_t k, double w1, double w2) {
    if (!(w1 >= 0.0) || !(w2 >= 0.0) || !std::isfinite(w1) || !std::isfinite(w2))
        throw InvalidArgument("b_hat: weights must be finite and nonnegative");
    const double kd = static_cast<double>(k);
    const double nd = static_cast<double>(s.n);
    if (kd * w1 > nd) throw InvalidArgument("b_hat: window k*w1/n exceeds 1");
    if (kd * w2 > nd) throw InvalidArgument("b_hat: window k*w2/n exceeds 1");
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> rank(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) rank[order[t]] = r;
        i = j + 1;
    }
    return rank;
}

PseudoSample pseudo_observations(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InvalidArgument("pseudo_observations: x and y differ in length");
    if (x.size() < 2) throw InvalidArgument("pseudo_observations: need at least 2 observations");
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
            throw InvalidArgument("pseudo_observations: non-finite value at index " + std::to_string(i));
    PseudoSample s;
    s.n = x.size();
    s.rank_u = average_ranks(x);
    s.rank_v = average_ranks(y);
    const double nd = static_cast<double>(s.n);
    s.u.resize(s.n);
    s.v.resize(s.n);
    for (std::size_t i = 0; i < s.n; ++i) {
        s.u[i] = s.rank_u[i] / nd;
        s.v[i] = s.rank_v[i] / nd;
    }
    return s;
}

PseudoSample reflect_second(const PseudoSample& s) {
    PseudoSample out = s;
    const double nd = static_cast<double>(s.n);
    for (std::size_t i = 0; i < s.n; ++i) {
        out.rank_v[i] = nd + 1.0 - s.rank_v[i];
        out.v[i] = out.rank_v[i] / nd;
    }
    return out;
}

double empirical_copula(const PseudoSample& s, double u, double v) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < s.n; ++i)
        if (s.u[i] <= u && s.v[i] <= v) ++count;
    return static_cast<double>(count) / static_cast<double>(s.n);
}

double A_hat(const PseudoSample& s, std::size_t k, double v) {
    check_k(s, k, "A_hat");
    const double kd = static_cast<double>(k);
    std::size_t count = 0;
    for (std::size_t i = 0; i < s.n; ++i)
        if (s.rank_u[i] <= kd && s.v[i] <= v) ++count;
    return static_cast<double>(count) / kd;
}

double b_hat(const PseudoSample& s, std::size_t k, double w1, double w2) {
    check_k(s, k, "b_hat");
    check_weights(s, k, w1, w2);
    const double kd = static_cast<double>(k);
    const double r1 = kd * w1;
    const double r2 = kd * w2;
    std::size_t count = 0;
    for (std::size_t i = 0; i < s.n; ++i)
        if (s.rank_u[i] <= r1 && s.rank_v[i] <= r2) ++count;
    return static_cast<double>(count) / kd;
}

TailCoefficients tail_coefficients(const PseudoSample& s, std::size_t k) {
    check_k(s, k, "tail_coefficients");
    TailCoefficients tc;
    tc.k = k;
    tc.n = s.n;
    tc.lambda_hat = b_hat(s, k, 1.0, 1.0);
    tc.lambda_hat_2star = b_hat(reflect_second(s), k, 1.0, 1.0);
    return tc;
}

std::vector<double> A_hat_curve(const PseudoSample& s, std::size_t k, std::span<const double> v) {
    check_k(s, k, "A_hat");
    const double kd = static_cast<double>(k);
    std::vector<double> selected;
    for (std::size_t i = 0; i < s.n; ++i)
        if (s.rank_u[i] <= kd) selected.push_back(s.v[i]);
    std::sort(selected.begin(), selected.end());
    std::vector<double> out(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) {
        const auto count = std::upper_bound(selected.begin(), selected.end(), v[j]) - selected.begin();
        out[j] = static_cast<double>(count) / kd;
    }
    return out;
}

std::vector<double> b_hat_curve(const PseudoSample& s, std::size_t k, std::span<const double> w1,
                                std::span<const double> w2) {
    check_k(s, k, "b_hat");
    if (w1.size() != w2.size()) throw InvalidArgument("b_hat_curve: weight vectors differ in length");
    double w1_max = 0.0;
    for (std::size_t j = 0; j < w1.size(); ++j) {
        check_weights(s, k, w1[j], w2[j]);
        w1_max = std::max(w1_max, w1[j]);
    }
    // Only points inside the widest first-coordinate window can contribute.
    const double kd = static_cast<double>(k);
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < s.n; ++i)
        if (s.rank_u[i] <= kd * w1_max) pts.emplace_back(s.rank_u[i], s.rank_v[i]);
    std::vector<double> out(w1.size());
    for (std::size_t j = 0; j < w1.size(); ++j) {
        const double r1 = kd * w1[j];
        const double r2 = kd * w2[j];
        std::size_t count = 0;
        for (const auto& [ru, rv] : pts)
            if (ru <= r1 && rv <= r2) ++count;
        out[j] = static_cast<double>(count) / kd;
    }
    return out;
}

}  // namespace covar::empirical
