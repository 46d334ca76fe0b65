#include "tagbench/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "tagbench/error.hpp"

namespace tagbench {

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw UndefinedCorrelationError("length mismatch");
  const std::size_t n = x.size();
  if (n < 2) throw UndefinedCorrelationError("need at least two observations");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) throw UndefinedCorrelationError("zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationResult point_biserial(std::span<const double> values, std::span<const bool> flags) {
  if (values.size() != flags.size()) throw UndefinedCorrelationError("length mismatch");
  const std::size_t n = values.size();
  if (n < 3) throw UndefinedCorrelationError("need at least three observations");

  double sum1 = 0, sum0 = 0, mean = 0;
  std::size_t n1 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mean += values[i];
    if (flags[i]) {
      sum1 += values[i];
      ++n1;
    } else {
      sum0 += values[i];
    }
  }
  const std::size_t n0 = n - n1;
  if (n1 == 0 || n0 == 0) throw UndefinedCorrelationError("flags contain a single class");
  const double dn = static_cast<double>(n);
  mean /= dn;
  double ss = 0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / dn);
  if (sd == 0) throw UndefinedCorrelationError("values have zero variance");

  const double m1 = sum1 / static_cast<double>(n1);
  const double m0 = sum0 / static_cast<double>(n0);
  const double r = std::clamp(
      (m1 - m0) / sd * std::sqrt(static_cast<double>(n1) * static_cast<double>(n0) / (dn * dn)),
      -1.0, 1.0);

  CorrelationResult result;
  result.r = r;
  result.n = n;
  const double df = dn - 2;
  if (std::abs(r) >= 1.0) {
    result.p_value = 0.0;
  } else {
    result.p_value = student_t_two_sided_p(r * std::sqrt(df / (1 - r * r)), df);
  }
  return result;
}

namespace {

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_continued_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  const double qab = a + b, qap = a + 1, qam = a - 1;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < eps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0 && b > 0)) throw ArgumentError("beta parameters must be positive");
  if (x <= 0) return 0.0;
  if (x >= 1) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1) / (a + b + 2)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0)) throw ArgumentError("degrees of freedom must be positive");
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  return std::clamp(regularized_incomplete_beta(df / 2, 0.5, df / (df + t * t)), 0.0, 1.0);
}

}  // namespace tagbench
