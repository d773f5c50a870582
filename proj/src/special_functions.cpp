#include "hsmuce/special_functions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hsmuce {

namespace {

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 500; ++m) {
    const double m2 = 2.0 * m;
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
    if (std::fabs(del - 1.0) <= kEps) break;
  }
  return h;
}

double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Density of F(1, c); used for the Newton step of the quantile.
double f_pdf(double x, int c) {
  if (x <= 0.0) return std::numeric_limits<double>::infinity();
  const double a = 0.5;
  const double b = 0.5 * c;
  const double u = x / (x + c);
  const double log_pdf = (a - 1.0) * std::log(u) + (b - 1.0) * std::log1p(-u) -
                         log_beta(a, b) + std::log(c) - 2.0 * std::log(x + c);
  return std::exp(log_pdf);
}

}  // namespace

double incomplete_beta_reg(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error("incomplete_beta_reg: invalid arguments");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double front =
      std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - std::exp(b * std::log1p(-x) + a * std::log(x) - log_beta(b, a)) *
                   beta_continued_fraction(b, a, 1.0 - x) / b;
}

double incomplete_gamma_reg(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) {
    throw std::domain_error("incomplete_gamma_reg: invalid arguments");
  }
  if (x == 0.0) return 0.0;
  const double log_front = a * std::log(x) - x - std::lgamma(a);
  if (x < a + 1.0) {
    // Series representation.
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(log_front);
  }
  // Continued fraction for the upper tail (modified Lentz).
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) <= 1e-16) break;
  }
  return 1.0 - std::exp(log_front) * h;
}

double f_cdf(double x, int c) {
  if (c < 1) {
    throw std::domain_error("f_cdf: denominator degrees of freedom must be >= 1");
  }
  if (!(x >= 0.0)) {
    throw std::domain_error("f_cdf: statistic must be nonnegative, got " +
                            std::to_string(x));
  }
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  // P(F(1,c) <= x) = I_u(1/2, c/2) with u = x / (x + c). For u close to 1 the
  // complementary form I_{1-u}(c/2, 1/2) keeps full relative accuracy.
  const double u = x / (x + c);
  if (u < 0.75) {
    return incomplete_beta_reg(0.5, 0.5 * c, u);
  }
  return 1.0 - incomplete_beta_reg(0.5 * c, 0.5, c / (x + c));
}

double f_quantile(double p, int c) {
  if (c < 1) {
    throw std::domain_error("f_quantile: denominator degrees of freedom must be >= 1");
  }
  if (!(p >= 0.0 && p < 1.0)) {
    throw std::domain_error("f_quantile: probability must lie in [0, 1), got " +
                            std::to_string(p));
  }
  if (p == 0.0) return 0.0;

  // Bracket the root. The sandwich c[(1-p^2)^{-1/c} - 1] <= q gives a cheap
  // positive starting lower bound; expand upward until the CDF crosses p.
  double lo = c * (std::pow(1.0 - p * p, -1.0 / c) - 1.0);
  if (!(lo > 0.0) || !std::isfinite(lo)) lo = 1e-12;
  double hi = std::max(2.0 * lo, 1.0);
  while (f_cdf(hi, c) < p) {
    lo = hi;
    hi *= 4.0;
    if (hi > 1e300) throw std::runtime_error("f_quantile: bracket expansion failed");
  }
  if (f_cdf(lo, c) > p) lo = 0.0;

  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double err = f_cdf(x, c) - p;
    if (err > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    if (std::fabs(err) < 1e-11 && (hi - lo) < 1e-10 * (1.0 + x)) break;
    const double deriv = f_pdf(x, c);
    double next = x - err / deriv;
    if (!(next > lo && next < hi) || !std::isfinite(next)) {
      next = 0.5 * (lo + hi);  // bisection fallback
    }
    x = next;
  }
  return x;
}

double gaussian_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.7071067811865475244);
}

double chi2_cdf(double x, int k) {
  if (k < 1) throw std::domain_error("chi2_cdf: degrees of freedom must be >= 1");
  if (!(x >= 0.0)) throw std::domain_error("chi2_cdf: argument must be nonnegative");
  return incomplete_gamma_reg(0.5 * k, 0.5 * x);
}

}  // namespace hsmuce
