#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mflab/core/activation.hpp"
#include "mflab/core/func_h.hpp"
#include "mflab/core/measure.hpp"
#include "mflab/dynamics/dynamics.hpp"
#include "mflab/meanfield/meanfield.hpp"

namespace mflab {

/// Raised by the limit solvers on step-size or eigensolver trouble.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class Harvest { SingleChain, IidRestarts };

struct MuSampling {
  std::size_t M = 256;
  std::uint64_t burn_in = 200;
  std::uint64_t stride = 10;
  double tol = 1e-6;
  Harvest harvest = Harvest::SingleChain;
  std::uint64_t seed = 1;
};

/// Approximate draws from the stationary law of (x, z, y, h).
struct StationarySample {
  std::vector<ChainH> entries;
  std::uint64_t burn_in = 0;
  std::uint64_t stride = 0;
  std::uint64_t seed = 0;

  std::size_t size() const { return entries.size(); }
};

/// ceil(log(tol) / log(q0)).
std::uint64_t min_burn_in(double tol, double q0);

/// Throws ConfigError when q0 >= 1 or burn_in is below min_burn_in(tol, q0).
StationarySample sample_mu(const DynamicsSpec& spec, const MeasureSample& lambda,
                           const Activation& act, const MuSampling& opts);

struct KernelGram {
  Eigen::MatrixXd K;
  Eigen::VectorXd y;
  std::uint64_t sample_seed = 0;

  std::size_t size() const { return static_cast<std::size_t>(y.size()); }
};

/// K[i][j] = kernel_tilde(H_i, H_j) over the shared lambda sample, exactly
/// symmetric.
KernelGram build_gram(const StationarySample& s, const MeasureSample& lambda,
                      const Activation& act);

enum class LimitMethod { Rk4, EigenClosedForm };

struct LimitTrajectory {
  std::vector<double> times;
  Eigen::MatrixXd u; // row r holds u(times[r], .)
  LimitMethod method = LimitMethod::Rk4;
  double alpha = 1.0;

  double T() const { return times.empty() ? 0.0 : times.back(); }
};

/// Largest stable step 0.1 / (alpha * lambda_max(K) / M).
double stable_dt(const KernelGram& g, double alpha);

/// RK4 on du/dt = -(alpha/M) K (u - y), u(0) = 0, recording every
/// `record_every` steps and at T. Throws NumericError when dt exceeds
/// stable_dt.
LimitTrajectory integrate(const KernelGram& g, double alpha, double T, double dt,
                          std::size_t record_every = 1);

/// u(t) = Q (I - exp(-(alpha/M) Lambda t)) Q^T y, with the eigendecomposition
/// computed once.
class ClosedForm {
public:
  ClosedForm(const KernelGram& g, double alpha);
  Eigen::VectorXd at(double t) const;
  LimitTrajectory on_grid(const std::vector<double>& times) const;
  const Eigen::VectorXd& eigenvalues() const { return evals_; }

private:
  Eigen::MatrixXd Q_;
  Eigen::VectorXd evals_;
  Eigen::VectorXd qty_;
  double rate_;
};

Eigen::VectorXd closed_form(const KernelGram& g, double alpha, double t);

/// g_t(h_test) = -alpha int_0^t (1/M) sum_j (u_j(s) - y_j) K_{x_j}(h_test, h_j) ds
/// by the trapezoidal rule on the trajectory grid (linear interpolation inside
/// the final cell). Throws std::domain_error for t outside [0, T].
double g_limit_eval(const LimitTrajectory& traj, const StationarySample& s, const KernelGram& g,
                    const FuncH& h_test, const MeasureSample& lambda, const Activation& act,
                    double t);

/// Precomputed kernel column for one test function, reusable across times.
std::vector<double> kernel_column(const StationarySample& s, const FuncH& h_test,
                                  const MeasureSample& lambda, const Activation& act);
double g_limit_eval_column(const LimitTrajectory& traj, const KernelGram& g,
                           const std::vector<double>& column, double t);

struct LossPoint {
  double t;
  double loss;
};

/// loss(t) = (1/2M) sum_j (u_j(t) - y_j)^2.
std::vector<LossPoint> loss_curve(const LimitTrajectory& traj, const KernelGram& g);

/// Non-increasing up to rel_tol * loss(0) between consecutive times.
bool loss_monotone(const std::vector<LossPoint>& curve, double rel_tol = 1e-10);

double max_abs_difference(const LimitTrajectory& a, const LimitTrajectory& b);

std::string method_name(LimitMethod m);

} // namespace mflab
