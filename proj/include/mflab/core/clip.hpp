#pragma once

#include <cstdint>

namespace mflab {

/// Smooth clipping psi_N with threshold N^gamma.
///
/// psi_N(x) = integral_0^x rho_N(y) dy where rho_N is the C-infinity plateau
/// built from exp(-1/x): rho_N = 1 on |x| <= N^gamma, 0 on |x| > 2 N^gamma.
/// psi_N is odd, 1-Lipschitz, the identity on the plateau and saturates at
/// +-1.5 N^gamma.
class ClipSpec {
public:
  ClipSpec(std::uint64_t n, double gamma);

  std::uint64_t n() const { return n_; }
  double gamma() const { return gamma_; }
  /// N^gamma
  double threshold() const { return threshold_; }
  double outer_threshold() const { return 2.0 * threshold_; }

private:
  std::uint64_t n_;
  double gamma_;
  double threshold_;
};

/// Smooth step g(x) = f(x) / (f(x) + f(1-x)), f(x) = exp(-1/x) for x > 0.
double smooth_step(double x);

/// rho_N(x) in [0,1].
double clip_deriv(double x, const ClipSpec& spec);

/// psi_N(x). Throws std::domain_error on non-finite input.
double clip_eval(double x, const ClipSpec& spec);

} // namespace mflab
