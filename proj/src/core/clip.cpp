#include "mflab/core/clip.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace mflab {

namespace {

// 8-point Gauss-Legendre on [-1,1].
constexpr std::array<double, 8> kGlNodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGlWeights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

double bump_tail(double f) {
  // 1 - g(v): the descending half of rho_N expressed on the unit interval.
  return smooth_step(1.0 - f);
}

double gl_panel(double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double acc = 0.0;
  for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
    acc += kGlWeights[i] * bump_tail(mid + half * kGlNodes[i]);
  }
  return acc * half;
}

double adaptive_gl(double a, double b, double whole, double tol, int depth) {
  const double mid = 0.5 * (a + b);
  const double left = gl_panel(a, mid);
  const double right = gl_panel(mid, b);
  if (depth <= 0 || std::abs(left + right - whole) <= tol) {
    return left + right;
  }
  return adaptive_gl(a, mid, left, 0.5 * tol, depth - 1) +
         adaptive_gl(mid, b, right, 0.5 * tol, depth - 1);
}

// integral_0^u (1 - g(v)) dv for u in [0,1].
double transition_integral(double u) {
  if (u <= 0.0) {
    return 0.0;
  }
  if (u >= 1.0) {
    return 0.5; // g(v) + g(1-v) = 1
  }
  return adaptive_gl(0.0, u, gl_panel(0.0, u), 1e-15, 30);
}

} // namespace

ClipSpec::ClipSpec(std::uint64_t n, double gamma) : n_(n), gamma_(gamma) {
  if (n == 0) {
    throw std::domain_error("clip width N must be positive");
  }
  if (!(gamma > 0.0 && gamma < 0.25)) {
    throw std::domain_error("clip gamma must lie in (0, 1/4)");
  }
  threshold_ = std::pow(static_cast<double>(n), gamma);
}

double smooth_step(double x) {
  if (x <= 0.0) {
    return 0.0;
  }
  if (x >= 1.0) {
    return 1.0;
  }
  const double fx = std::exp(-1.0 / x);
  const double fy = std::exp(-1.0 / (1.0 - x));
  return fx / (fx + fy);
}

double clip_deriv(double x, const ClipSpec& spec) {
  if (!std::isfinite(x)) {
    throw std::domain_error("clip input is not finite");
  }
  const double s = spec.threshold();
  const double ax = std::abs(x);
  if (ax <= s) {
    return 1.0;
  }
  if (ax >= 2.0 * s) {
    return 0.0;
  }
  // g_{-2s,-s}(-|x|) with g_{-2s,-s}(|x|) = 1 on this range
  return smooth_step((2.0 * s - ax) / s);
}

double clip_eval(double x, const ClipSpec& spec) {
  if (!std::isfinite(x)) {
    throw std::domain_error("clip input is not finite");
  }
  const double s = spec.threshold();
  const double ax = std::abs(x);
  if (ax <= s) {
    return x;
  }
  const double mag = s * (1.0 + transition_integral(ax / s - 1.0));
  return x < 0.0 ? -mag : mag;
}

} // namespace mflab
