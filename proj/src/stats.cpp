#include "snls/stats.hpp"

#include <cmath>

#include "snls/errors.hpp"

namespace snls {
namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    throw DomainError("incomplete beta: a, b must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double beta_quantile(double a, double b, double q) {
  if (!(q >= 0.0 && q <= 1.0))
    throw DomainError("beta_quantile: q must lie in [0, 1]");
  if (q == 0.0) return 0.0;
  if (q == 1.0) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (regularized_incomplete_beta(a, b, mid) < q)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

Interval clopper_pearson(int successes, int trials, double level) {
  if (trials <= 0 || successes < 0 || successes > trials)
    throw DomainError("clopper_pearson: need 0 <= successes <= trials, trials > 0");
  if (!(level > 0.0 && level < 1.0))
    throw DomainError("clopper_pearson: level must lie in (0, 1)");
  const double alpha = 1.0 - level;
  Interval iv;
  if (successes == 0) {
    iv.lo = 0.0;
    iv.hi = 1.0 - std::pow(alpha / 2.0, 1.0 / trials);
  } else if (successes == trials) {
    iv.lo = std::pow(alpha / 2.0, 1.0 / trials);
    iv.hi = 1.0;
  } else {
    iv.lo = beta_quantile(successes, trials - successes + 1.0, alpha / 2.0);
    iv.hi = beta_quantile(successes + 1.0, trials - successes, 1.0 - alpha / 2.0);
  }
  return iv;
}

}  // namespace snls
