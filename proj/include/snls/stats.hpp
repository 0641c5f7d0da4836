#pragma once

namespace snls {

/// Regularized incomplete beta function I_x(a, b), continued-fraction
/// evaluation (Lentz). a, b > 0, x in [0, 1].
double regularized_incomplete_beta(double a, double b, double x);

/// Quantile of the Beta(a, b) distribution by bisection on the CDF.
double beta_quantile(double a, double b, double q);

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Exact (Clopper-Pearson) two-sided confidence interval for a binomial
/// proportion with `successes` out of `trials` at the given level.
/// successes = 0 gives [0, 1 - (alpha/2)^{1/n}]; successes = n mirrors it.
Interval clopper_pearson(int successes, int trials, double level = 0.95);

}  // namespace snls
