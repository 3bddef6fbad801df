#include <cmath>
#include <numbers>

#include "covar/errors.hpp"
#include "covar/marginal.hpp"

namespace covar::marginal {

SkewT::SkewT(double eta, double lambda_skew) : eta_(eta), lambda_(lambda_skew) {
    if (!(eta > 2.0) || !std::isfinite(eta)) throw InvalidArgument("skew-t: eta must be > 2");
    if (!(lambda_skew > -1.0 && lambda_skew < 1.0)) throw InvalidArgument("skew-t: lambda must lie in (-1,1)");
    const double log_c = std::lgamma(0.5 * (eta + 1.0)) - std::lgamma(0.5 * eta) -
                         0.5 * std::log(std::numbers::pi * (eta - 2.0));
    const double c = std::exp(log_c);
    a_ = 4.0 * lambda_skew * c * (eta - 2.0) / (eta - 1.0);
    b_ = std::sqrt(1.0 + 3.0 * lambda_skew * lambda_skew - a_ * a_);
    log_bc_ = std::log(b_) + log_c;
    scale_ = std::sqrt((eta - 2.0) / eta);
}

double SkewT::logpdf(double z) const {
    const double half = z < -a_ / b_ ? 1.0 - lambda_ : 1.0 + lambda_;
    const double y = (b_ * z + a_) / half;
    return log_bc_ - 0.5 * (eta_ + 1.0) * std::log1p(y * y / (eta_ - 2.0));
}

double SkewT::cdf(double z) const {
    if (std::isnan(z)) throw InvalidArgument("skewt_cdf: z is NaN");
    const double y = b_ * z + a_;
    if (z < -a_ / b_) {
        const double l = 1.0 - lambda_;
        return l * numerics::student_t_cdf(y / (l * scale_), eta_);
    }
    const double l = 1.0 + lambda_;
    return 0.5 * (1.0 - lambda_) + l * (numerics::student_t_cdf(y / (l * scale_), eta_) - 0.5);
}

double SkewT::quantile(double q) const {
    if (!(q > 0.0 && q < 1.0)) throw InvalidArgument("skewt_quantile: q must lie in (0,1)");
    const double split = 0.5 * (1.0 - lambda_);
    double y;
    if (q < split) {
        const double l = 1.0 - lambda_;
        y = l * scale_ * numerics::student_t_quantile(q / l, eta_);
    } else {
        const double l = 1.0 + lambda_;
        y = l * scale_ * numerics::student_t_quantile(0.5 + (q - split) / l, eta_);
    }
    return (y - a_) / b_;
}

double skewt_logpdf(double z, double eta, double lambda_skew) { return SkewT(eta, lambda_skew).logpdf(z); }

double skewt_pdf(double z, double eta, double lambda_skew) { return std::exp(skewt_logpdf(z, eta, lambda_skew)); }

double skewt_cdf(double z, double eta, double lambda_skew) { return SkewT(eta, lambda_skew).cdf(z); }

double skewt_quantile(double q, double eta, double lambda_skew) { return SkewT(eta, lambda_skew).quantile(q); }

}  // namespace covar::marginal
