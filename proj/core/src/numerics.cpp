#include <array>
#include <cmath>
#include <sstream>

#include "covar/errors.hpp"
#include "covar/numerics.hpp"

namespace covar {

BracketError::BracketError(double lo, double hi, double f_lo, double f_hi)
    : std::runtime_error([&] {
          std::ostringstream os;
          os.precision(17);
          os << "root not bracketed: f(" << lo << ") = " << f_lo << ", f(" << hi << ") = " << f_hi;
          return os.str();
      }()),
      lo_(lo), hi_(hi), f_lo_(f_lo), f_hi_(f_hi) {}

NumericError::NumericError(const std::string& what, double abscissa)
    : std::runtime_error([&] {
          std::ostringstream os;
          os.precision(17);
          os << what << " (at x = " << abscissa << ")";
          return os.str();
      }()),
      abscissa_(abscissa) {}

OutOfRange::OutOfRange(const std::string& what, double b_inf)
    : std::out_of_range([&] {
          std::ostringstream os;
          os.precision(17);
          os << what << " (b_inf = " << b_inf << ")";
          return os.str();
      }()),
      b_inf_(b_inf) {}

}  // namespace covar

namespace covar::numerics {

double find_root_monotone(const ScalarFn& f, double lo, double hi, double tol, double rel_tol) {
    if (!(lo <= hi)) throw InvalidArgument("find_root_monotone: lo must not exceed hi");
    if (!(tol >= 0.0) || !(rel_tol >= 0.0) || (tol == 0.0 && rel_tol == 0.0))
        throw InvalidArgument("find_root_monotone: tolerance must be positive");
    const double f_lo = f(lo);
    const double f_hi = f(hi);
    if (!(f_lo <= 0.0) || !(f_hi >= 0.0)) throw BracketError(lo, hi, f_lo, f_hi);
    if (f_lo == 0.0) return lo;

    // Invariant: f(lo) < 0 <= f(hi). Illinois false-position steps while they
    // at least halve the bracket every second iteration, bisection otherwise.
    double flo = f_lo;
    double fhi = f_hi;
    int side = 0;
    double width_two_back = hi - lo;
    for (int iter = 0; hi - lo > tol + rel_tol * std::fabs(hi); ++iter) {
        double x = lo + 0.5 * (hi - lo);
        const bool bisect = (iter % 2 == 1) && (hi - lo) > 0.5 * width_two_back;
        if (iter % 2 == 1) width_two_back = hi - lo;
        if (!bisect && fhi > flo) {
            const double t = lo - flo * (hi - lo) / (fhi - flo);
            if (t > lo && t < hi) x = t;
        }
        if (x <= lo || x >= hi) break;
        const double fx = f(x);
        if (fx >= 0.0) {
            hi = x;
            fhi = fx;
            if (side == 1) flo *= 0.5;
            side = 1;
        } else {
            lo = x;
            flo = fx;
            if (side == -1) fhi *= 0.5;
            side = -1;
        }
    }
    return hi;
}

std::vector<double> midpoint_nodes(int panels) {
    if (panels < 1) throw InvalidArgument("midpoint_nodes: panels must be >= 1");
    std::vector<double> nodes(static_cast<std::size_t>(panels));
    for (int j = 0; j < panels; ++j) nodes[static_cast<std::size_t>(j)] = (j + 0.5) / panels;
    return nodes;
}

double integrate_unit_interval(const ScalarFn& f, int panels) {
    if (panels < 1) throw InvalidArgument("integrate_unit_interval: panels must be >= 1");
    double sum = 0.0;
    for (int j = 0; j < panels; ++j) {
        const double x = (j + 0.5) / panels;
        const double y = f(x);
        if (!std::isfinite(y)) throw NumericError("integrate_unit_interval: non-finite integrand", x);
        sum += y;
    }
    return sum / panels;
}

namespace {

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct GkEstimate {
    double value;
    double error;
};

GkEstimate gauss_kronrod(const ScalarFn& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    if (!std::isfinite(fc)) throw NumericError("integrate_adaptive: non-finite integrand", center);
    double result_k = fc * kWgk[7];
    double result_g = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[static_cast<std::size_t>(j)];
        const double f1 = f(center - dx);
        const double f2 = f(center + dx);
        if (!std::isfinite(f1)) throw NumericError("integrate_adaptive: non-finite integrand", center - dx);
        if (!std::isfinite(f2)) throw NumericError("integrate_adaptive: non-finite integrand", center + dx);
        result_k += kWgk[static_cast<std::size_t>(j)] * (f1 + f2);
        if (j % 2 == 1) result_g += kWg[static_cast<std::size_t>(j / 2)] * (f1 + f2);
    }
    return {result_k * half, std::fabs((result_k - result_g) * half)};
}

double adaptive_step(const ScalarFn& f, double a, double b, const GkEstimate& whole, double abs_tol,
                     double rel_tol, int depth) {
    if (whole.error <= std::max(abs_tol, rel_tol * std::fabs(whole.value)) || depth <= 0)
        return whole.value;
    const double mid = 0.5 * (a + b);
    const GkEstimate left = gauss_kronrod(f, a, mid);
    const GkEstimate right = gauss_kronrod(f, mid, b);
    return adaptive_step(f, a, mid, left, 0.5 * abs_tol, rel_tol, depth - 1) +
           adaptive_step(f, mid, b, right, 0.5 * abs_tol, rel_tol, depth - 1);
}

}  // namespace

double integrate_adaptive(const ScalarFn& f, double a, double b, double abs_tol, double rel_tol,
                          int max_depth) {
    if (a == b) return 0.0;
    if (b < a) return -integrate_adaptive(f, b, a, abs_tol, rel_tol, max_depth);
    return adaptive_step(f, a, b, gauss_kronrod(f, a, b), abs_tol, rel_tol, max_depth);
}

}  // namespace covar::numerics
