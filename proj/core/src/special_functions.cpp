#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "covar/errors.hpp"
#include "covar/numerics.hpp"

namespace covar::numerics {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 1000;

// Series expansion of P(a, x); converges quickly for x < a + 1.
double gamma_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < kMaxIter; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * kEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x) (modified Lentz); used for x >= a + 1.
double gamma_continued_fraction(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

void check_gamma_args(double shape, double x) {
    if (!(shape > 0.0) || !std::isfinite(shape))
        throw InvalidArgument("incomplete gamma: shape must be positive, got " + std::to_string(shape));
    if (!(x >= 0.0))
        throw InvalidArgument("incomplete gamma: x must be nonnegative, got " + std::to_string(x));
}

// Continued fraction for the incomplete beta (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m < kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

// I_x(a, b) with the complement xc = 1 - x supplied separately so callers can
// avoid cancellation when x is close to one.
double incomplete_beta(double a, double b, double x, double xc) {
    if (x <= 0.0) return 0.0;
    if (xc <= 0.0) return 1.0;
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                             a * std::log(x) + b * std::log(xc);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, xc) / b;
}

// Lower tail probability of the t distribution for x <= 0, accurate in the tail.
double student_t_lower(double x, double df) {
    const double x2 = x * x;
    const double t = df / (df + x2);
    const double tc = x2 / (df + x2);
    return 0.5 * incomplete_beta(0.5 * df, 0.5, t, tc);
}

// Safeguarded Newton iteration for a strictly increasing F on [lo, hi].
template <class F, class DF>
double newton_bracketed(F&& cdf, DF&& pdf, double target, double lo, double hi, double x) {
    for (int it = 0; it < 300; ++it) {
        const double fx = cdf(x) - target;
        if (fx == 0.0) return x;
        if (fx < 0.0) lo = x; else hi = x;
        const double dens = pdf(x);
        double next = (dens > 0.0 && std::isfinite(dens)) ? x - fx / dens : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::fabs(next - x) <= 4.0 * kEps * std::max(std::fabs(x), 1e-300)) return next;
        if (hi - lo <= 4.0 * kEps * std::max(std::fabs(lo), std::fabs(hi))) return next;
        x = next;
    }
    return x;
}

}  // namespace

double reg_incomplete_gamma(double shape, double x) {
    check_gamma_args(shape, x);
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    if (x < shape + 1.0) return std::clamp(gamma_series(shape, x), 0.0, 1.0);
    return std::clamp(1.0 - gamma_continued_fraction(shape, x), 0.0, 1.0);
}

double reg_incomplete_gamma_upper(double shape, double x) {
    check_gamma_args(shape, x);
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < shape + 1.0) return std::clamp(1.0 - gamma_series(shape, x), 0.0, 1.0);
    return std::clamp(gamma_continued_fraction(shape, x), 0.0, 1.0);
}

double reg_incomplete_gamma_inv(double shape, double q) {
    if (!(shape > 0.0) || !std::isfinite(shape))
        throw InvalidArgument("incomplete gamma inverse: shape must be positive");
    if (!(q >= 0.0 && q < 1.0))
        throw InvalidArgument("incomplete gamma inverse: q must lie in [0,1), got " + std::to_string(q));
    if (q == 0.0) return 0.0;

    const double log_gamma = std::lgamma(shape);
    auto pdf = [&](double x) {
        if (x <= 0.0) return 0.0;
        return std::exp((shape - 1.0) * std::log(x) - x - log_gamma);
    };

    // Small-q approximation P(a,x) ~ x^a / Gamma(a+1) gives a good start.
    double x0 = std::exp((std::log(q) + std::lgamma(shape + 1.0)) / shape);
    double hi = std::max(1.0, 2.0 * x0);
    while (reg_incomplete_gamma(shape, hi) < q) hi *= 2.0;
    if (!(x0 > 0.0 && x0 < hi)) x0 = 0.5 * hi;

    if (q > 0.5) {
        // Work with the upper tail so that the residual keeps full precision.
        const double qc = 1.0 - q;
        auto neg_upper = [&](double x) { return -reg_incomplete_gamma_upper(shape, x); };
        return newton_bracketed(neg_upper, pdf, -qc, 0.0, hi, x0);
    }
    auto lower = [&](double x) { return reg_incomplete_gamma(shape, x); };
    return newton_bracketed(lower, pdf, q, 0.0, hi, x0);
}

double reg_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw InvalidArgument("incomplete beta: a and b must be positive");
    if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("incomplete beta: x must lie in [0,1]");
    return std::clamp(incomplete_beta(a, b, x, 1.0 - x), 0.0, 1.0);
}

double student_t_pdf(double x, double df) {
    if (!(df > 0.0)) throw InvalidArgument("student t: df must be positive");
    const double log_c = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
                         0.5 * std::log(df * std::numbers::pi);
    return std::exp(log_c - 0.5 * (df + 1.0) * std::log1p(x * x / df));
}

double student_t_cdf(double x, double df) {
    if (!(df > 0.0)) throw InvalidArgument("student t: df must be positive, got " + std::to_string(df));
    if (std::isnan(x)) throw InvalidArgument("student t: x is NaN");
    if (x == 0.0) return 0.5;
    if (std::isinf(x)) return x > 0.0 ? 1.0 : 0.0;
    if (x < 0.0) return student_t_lower(x, df);
    return 1.0 - student_t_lower(-x, df);
}

double student_t_quantile(double q, double df) {
    if (!(df > 0.0)) throw InvalidArgument("student t quantile: df must be positive");
    if (!(q > 0.0 && q < 1.0))
        throw InvalidArgument("student t quantile: q must lie strictly inside (0,1), got " + std::to_string(q));
    if (q == 0.5) return 0.0;
    if (df == 1.0) return std::tan(std::numbers::pi * (q - 0.5));
    if (df == 2.0) return (2.0 * q - 1.0) / std::sqrt(2.0 * q * (1.0 - q));

    // Solve in the lower tail and reflect, so the residual is a small probability.
    const bool upper = q > 0.5;
    const double ql = upper ? 1.0 - q : q;
    double lo = -1.0;
    while (student_t_lower(lo, df) > ql) lo *= 2.0;
    const double z = normal_quantile(ql);
    double x0 = z * std::sqrt(df / std::max(df - 2.0, 0.5));
    if (!(x0 > lo && x0 < 0.0)) x0 = 0.5 * lo;
    auto cdf = [&](double x) { return x >= 0.0 ? 0.5 : student_t_lower(x, df); };
    auto pdf = [&](double x) { return student_t_pdf(x, df); };
    const double x = newton_bracketed(cdf, pdf, ql, lo, 0.0, x0);
    return upper ? -x : x;
}

double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_quantile(double q) {
    if (!(q > 0.0 && q < 1.0))
        throw InvalidArgument("normal quantile: q must lie strictly inside (0,1), got " + std::to_string(q));
    // Acklam's rational approximation followed by one Halley refinement step.
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    double x;
    if (q < p_low) {
        const double r = std::sqrt(-2.0 * std::log(q));
        x = (((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
            ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
    } else if (q <= 1.0 - p_low) {
        const double s = q - 0.5;
        const double r = s * s;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * s /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double r = std::sqrt(-2.0 * std::log1p(-q));
        x = -(((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
            ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
    }
    const double e = (x < 0.0 ? normal_cdf(x) - q : -(0.5 * std::erfc(x / std::numbers::sqrt2) - (1.0 - q)));
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

}  // namespace covar::numerics
