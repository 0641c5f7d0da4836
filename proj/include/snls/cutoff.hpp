#pragma once

#include <cmath>

#include "snls/errors.hpp"

namespace snls {

/// Smooth monotone step: exactly 1 on [0,1], exactly 0 on [2,inf), strictly
/// decreasing in between. Built from the bump partition
/// theta(x) = q(2-x) / (q(2-x) + q(x-1)) with q(y) = exp(-sharpness/y).
struct CutoffSpec {
  double sharpness = 1.0;

  void validate() const {
    if (!(sharpness > 0.0)) throw DomainError("cutoff: sharpness must be positive");
  }
};

inline double theta_eval(const CutoffSpec& spec, double x) {
  if (x < 0.0) throw DomainError("theta_eval: argument must be >= 0");
  if (x <= 1.0) return 1.0;
  if (x >= 2.0) return 0.0;
  const auto q = [&](double y) { return y > 0.0 ? std::exp(-spec.sharpness / y) : 0.0; };
  const double up = q(2.0 - x);
  return up / (up + q(x - 1.0));
}

}  // namespace snls
