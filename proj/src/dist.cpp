#include "mams/dist.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace mams {

double std_normal_cdf(double x) {
  // erfc keeps full precision in the lower tail; symmetry handles the upper.
  return 0.5 * std::erfc(-x * M_SQRT1_2);
}

namespace {

// Wichura's AS 241 (PPND16) rational approximation to the normal quantile.
double ppnd16(double p) {
  const double q = p - 0.5;
  double r;
  if (std::fabs(q) <= 0.425) {
    r = 0.180625 - q * q;
    const double num =
        q * (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                   6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                 1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
               1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
    const double den =
        (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
              3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
            5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
          4.2313330701600911252e+1) * r + 1.0);
    return num / den;
  }
  r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double x;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
            3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
          4.63033784615654529590e+0) * r + 1.42343711074968357734e+0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
          2.05319162663775882187e+0) * r + 1.0);
    x = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
          5.46378491116411436990e+0) * r + 6.65790464350110377720e+0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    x = num / den;
  }
  return q < 0.0 ? -x : x;
}

double std_normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

}  // namespace

double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("std_normal_quantile: p must lie in (0,1), got " +
                                std::to_string(p));
  }
  double x = ppnd16(p);
  // One Newton step against the erfc-based CDF tightens the rational
  // approximation to machine precision.
  const double f = std_normal_cdf(x) - p;
  const double d = std_normal_pdf(x);
  if (d > 0.0) x -= f / d;
  return x;
}

namespace detail {

double reg_inc_beta(double a, double b, double x) {
  if (x < 0.0 || x > 1.0) throw std::invalid_argument("reg_inc_beta: x outside [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;

  // Continued fraction (modified Lentz); switch to the symmetric form when x
  // is past the central cut so the fraction converges quickly.
  const auto contfrac = [](double a, double b, double x) {
    constexpr double kTiny = 1e-300;
    constexpr double kEps = 1e-16;
    constexpr int kMaxIter = 2000;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
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
      if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw std::runtime_error("reg_inc_beta: continued fraction failed to converge");
  };

  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * contfrac(a, b, x) / a;
  }
  return 1.0 - front * contfrac(b, a, 1.0 - x) / b;
}

}  // namespace detail

static void check_df(int df, const char* fn) {
  if (df < 1) {
    throw std::invalid_argument(std::string(fn) + ": degrees of freedom must be >= 1, got " +
                                std::to_string(df));
  }
}

double student_t_cdf(double x, int df) {
  check_df(df, "student_t_cdf");
  if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(x)) return x > 0.0 ? 1.0 : 0.0;
  const double nu = static_cast<double>(df);
  const double z = nu / (nu + x * x);
  const double tail_half = 0.5 * detail::reg_inc_beta(0.5 * nu, 0.5, z);
  return x >= 0.0 ? 1.0 - tail_half : tail_half;
}

double student_t_pdf(double x, int df) {
  check_df(df, "student_t_pdf");
  const double nu = static_cast<double>(df);
  const double ln = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                    0.5 * std::log(nu * M_PI) -
                    0.5 * (nu + 1.0) * std::log1p(x * x / nu);
  return std::exp(ln);
}

double student_t_quantile(double p, int df) {
  check_df(df, "student_t_quantile");
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("student_t_quantile: p must lie in (0,1), got " +
                                std::to_string(p));
  }
  if (p == 0.5) return 0.0;

  // Starting point: the normal quantile, inflated toward the heavier t tail.
  const double z = std_normal_quantile(p);
  double x = df > 2 ? z * std::sqrt(static_cast<double>(df) / (df - 2)) : z * (1.0 + z * z);

  // Bracket the root, then safeguarded Newton.
  double lo = x, hi = x;
  double flo = student_t_cdf(lo, df) - p;
  double fhi = flo;
  double step = 1.0 + std::fabs(x);
  while (flo > 0.0) {
    lo -= step;
    step *= 2.0;
    flo = student_t_cdf(lo, df) - p;
  }
  step = 1.0 + std::fabs(x);
  while (fhi < 0.0) {
    hi += step;
    step *= 2.0;
    fhi = student_t_cdf(hi, df) - p;
  }

  x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = student_t_cdf(x, df) - p;
    if (f == 0.0) return x;
    if (f > 0.0) hi = x; else lo = x;
    const double d = student_t_pdf(x, df);
    double next = d > 0.0 ? x - f / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - x) <= 1e-14 * (1.0 + std::fabs(x))) return next;
    x = next;
  }
  return x;
}

}  // namespace mams
