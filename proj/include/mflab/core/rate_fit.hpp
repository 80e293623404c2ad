#pragma once

#include <span>

namespace mflab {

struct RatePoint {
  double n;
  double value;
};

/// Ordinary least squares of log(value) against log(n).
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Requires at least 3 points with positive n and value; throws
/// std::domain_error otherwise. r_squared is 1 when the values are constant.
RateFit fit_rate(std::span<const RatePoint> points);

} // namespace mflab
