#pragma once

#include <cstddef>
#include <span>

namespace tagbench {

struct CorrelationResult {
  double r = 0.0;        // in [-1, 1]
  double p_value = 1.0;  // two-sided
  std::size_t n = 0;
};

// Pearson product-moment correlation. Throws UndefinedCorrelationError for
// mismatched lengths, n < 2 or zero variance on either side.
double pearson(std::span<const double> x, std::span<const double> y);

// Point-biserial correlation of values against binary flags, using the
// population standard deviation. Needs n >= 3, both flag classes and
// non-constant values; throws UndefinedCorrelationError otherwise.
CorrelationResult point_biserial(std::span<const double> values, std::span<const bool> flags);

// I_x(a, b) by continued fraction, absolute error below 1e-12 for the
// arguments used by student_t_two_sided_p.
double regularized_incomplete_beta(double a, double b, double x);

// P(|T| >= |t|) for Student's t with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

}  // namespace tagbench
