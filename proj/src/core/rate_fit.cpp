#include "mflab/core/rate_fit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mflab {

RateFit fit_rate(std::span<const RatePoint> points) {
  if (points.size() < 3) {
    throw std::domain_error("rate fit needs at least 3 points");
  }
  const double count = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    if (!(p.n > 0.0) || !(p.value > 0.0)) {
      throw std::domain_error("rate fit needs positive abscissae and values");
    }
    mx += std::log(p.n);
    my += std::log(p.value);
  }
  mx /= count;
  my /= count;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : points) {
    const double dx = std::log(p.n) - mx;
    const double dy = std::log(p.value) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) {
    throw std::domain_error("rate fit needs at least two distinct abscissae");
  }
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  const double ss_res = syy - fit.slope * sxy;
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return fit;
}

} // namespace mflab
