#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mflab/core/activation.hpp"
#include "mflab/core/rng.hpp"

namespace mflab {

/// Raised when a dynamics or experiment configuration cannot be honoured.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Bounded, zero-mean noise applied independently per coordinate.
struct NoiseSpec {
  enum class Kind { None, Uniform, Rademacher };
  Kind kind = Kind::None;
  double halfwidth = 0.0;

  double sample(Rng& rng) const;
  /// sup |noise| for a single coordinate.
  double bound() const { return kind == Kind::None ? 0.0 : halfwidth; }
};

/// Hidden-Markov data process: (x', z') = g(x, z) + eps, y = f(x, z) + eta.
struct DynamicsSpec {
  using StateMap = std::function<void(std::span<const double>, std::span<double>)>;
  using OutputMap = std::function<double(std::span<const double>)>;

  std::string name;
  std::size_t d = 1;
  StateMap g;
  OutputMap f;
  double L = 0.0;     // joint Lipschitz bound of (f, g)
  double g_sup = 0.0; // sup of |g| over the closed unit ball
  double f_sup = 0.0; // sup of |f| over the closed unit ball
  NoiseSpec state_noise;
  NoiseSpec output_noise;
  enum class Init { UnitSquare, Origin };
  Init init = Init::UnitSquare;

  /// Euclidean bound on eps.
  double eps_bound() const;
  double eta_bound() const { return output_noise.bound(); }
  double c_y() const { return f_sup + eta_bound(); }
};

struct DataState {
  std::vector<double> x;
  double z = 0.0;
  double y = 0.0;
  std::uint64_t k = 0;

  double state_norm() const;
};

struct BuiltinOptions {
  double output_scale = 0.25;   // f(x, z) = output_scale * (x + z)
  double eta_halfwidth = 0.05;  // eta ~ U[-h, h]
  double eps_halfwidth = 0.0;   // eps ~ U[-h, h]^2; 0 reproduces the noise-free system
  std::optional<double> L;      // override of the computed Lipschitz bound
};

/// 1/2 tanh(P diag(1, 1/2) P^{-1} (x, z)) with P the rotation by 30 degrees.
DynamicsSpec make_builtin_rotation_tanh(const BuiltinOptions& opts = {});

/// The 2x2 linear part P diag(1, 1/2) P^{-1}, row-major.
std::array<double, 4> rotation_tanh_matrix();

/// Constant maps g = 0, f = 0 with no noise, for plumbing tests.
DynamicsSpec make_null_dynamics(std::size_t d = 1);

/// k = 0 state including y_0 = f(x_0, z_0) + eta_0.
DataState initial_state(const DynamicsSpec& spec, Rng& rng);

/// One transition; throws ConfigError when the result leaves |(x,z)| <= 1 or
/// |y| <= C_y.
DataState step_data(const DataState& state, const DynamicsSpec& spec, Rng& rng);

struct AssumptionReport {
  double L = 0.0;
  double c_sigma = 0.0;
  double q0 = 0.0;
  bool lipschitz_ok = false;   // L < 1
  bool activation_ok = false;  // C_sigma^2 < min(1/2, (1 - L^2) / 8)
  bool contraction_ok = false; // q0 < 1
  bool noise_ok = false;       // bounded noise, path bound max(sup|g|, |eps|) <= 1/2
  bool window_ok = true;       // beta in (1/2,1), gamma in (0,(1-beta)/2)

  bool passes() const {
    return lipschitz_ok && activation_ok && contraction_ok && noise_ok && window_ok;
  }
  std::string summary() const;
};

struct ScalingWindow {
  double beta;
  double gamma;
};

AssumptionReport validate_assumptions(const DynamicsSpec& spec, const Activation& act,
                                      std::optional<ScalingWindow> window = std::nullopt);

/// Contraction constant sqrt(L^2 + 8 C_sigma^2).
double contraction_q0(double L, double c_sigma);

} // namespace mflab
