#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mflab/core/activation.hpp"
#include "mflab/core/clip.hpp"
#include "mflab/core/func_h.hpp"
#include "mflab/core/measure.hpp"
#include "mflab/core/rng.hpp"
#include "mflab/dynamics/dynamics.hpp"

namespace mflab {

/// Which hidden unit feeds the C-update of unit i. `Own` uses S^i_{k+1};
/// `LastUnit` reads the listing's stray index j literally as the final value
/// of the forward loop, S^N_{k+1}.
enum class CUpdateIndex { Own, LastUnit };

/// Inner factor of the B-update.
///   Gradient: S^i_k * sum_l C^l_k dS^l_{k+1}   (d/dB^i of the truncated loss)
///   Listing:  sum_l C^l_k S^l_k dS^l_{k+1}     (as printed in the algorithm)
enum class BUpdateForm { Gradient, Listing };

struct ModelConfig {
  std::size_t N = 100;
  std::size_t d = 1;
  double beta = 0.75;
  double gamma = 0.1;
  double alpha = 1.0;
  std::uint64_t seed = 1;
  CUpdateIndex c_index = CUpdateIndex::Own;
  BUpdateForm b_form = BUpdateForm::Gradient;

  /// alpha / N^{2 - 2 beta}
  double learning_rate() const;
  /// N^{-beta}
  double output_scale() const;
  ClipSpec clip() const { return ClipSpec(N, gamma); }
  /// Throws ConfigError outside beta in (1/2,1), gamma in (0,(1-beta)/2).
  void validate() const;
};

struct ParamSet {
  Triples live;
  Triples init;

  std::size_t size() const { return live.size(); }
};

/// N i.i.d. draws from the default lambda, seeded by cfg.seed.
ParamSet init_params(const ModelConfig& cfg);
ParamSet params_from(Triples init);

struct HiddenState {
  std::vector<double> S;
  std::uint64_t k = 0;

  static HiddenState zeros(std::size_t n) { return {std::vector<double>(n, 0.0), 0}; }
};

/// (1/N) sum_j B_j S_j, computed once per step.
double feedback_scalar(const Triples& params, std::span<const double> S);

/// S_{k+1}^i = sigma(W^i x + (1/N) sum_j B^j S^j_k) with the live parameters.
HiddenState memory_step(const Triples& params, const HiddenState& s, std::span<const double> x,
                        const Activation& act);

/// N^{-beta} sum_i C_i S_i.
double predict(const Triples& params, std::span<const double> s_next, const ModelConfig& cfg);

/// g^N(h) = N^{-beta} sum_i C_i h(W_i).
double g_functional(const Triples& params, const FuncH& h, const ModelConfig& cfg,
                    const Activation& act);

struct StepResult {
  double y_hat = 0.0;
  double y = 0.0;
  double loss = 0.0;     // (y_hat - y)^2 / 2
  double residual = 0.0; // psi_N(y_hat) - y
  double feedback = 0.0; // (1/N) sum_j B^j_k S^j_k
};

/// Scratch buffers reused across steps.
struct StepWorkspace {
  std::vector<double> pre;
  std::vector<double> s_next;
  std::vector<double> ds_next;
};

/// One step of online SGD with tBPTT (tau = 1), in place. All right-hand
/// sides are read from the pre-update parameters. `target` overrides data.y.
StepResult sgd_tbptt_step_inplace(ParamSet& p, HiddenState& s, const DataState& data,
                                  const ModelConfig& cfg, const Activation& act,
                                  StepWorkspace& ws, std::optional<double> target = std::nullopt);

struct StepOutcome {
  ParamSet params;
  HiddenState hidden;
  double y_hat;
  double loss;
};

/// Value-semantics wrapper around sgd_tbptt_step_inplace.
StepOutcome sgd_tbptt_step(const ParamSet& p, const HiddenState& s, const DataState& data,
                           const ModelConfig& cfg, const Activation& act = {});

/// Largest per-step parameter increments allowed by the clipped updates.
struct IncrementBounds {
  double c;
  double w;
  double b;
};
IncrementBounds step_increment_bounds(const ParamSet& before, const ModelConfig& cfg,
                                      const Activation& act, double c_y,
                                      std::span<const double> x);

struct Drift {
  std::vector<double> per_unit;
  double max = 0.0;
};

/// |C - C0| + ||W - W0|| + |B - B0| per unit.
Drift drift(const ParamSet& p);
double max_drift(const ParamSet& p);

/// Compares the algorithm's increments (divided by -learning_rate) with
/// central finite differences (step 1e-6) of the truncated one-step loss.
/// Returns nullopt when |y_hat| >= N^gamma (clipping active).
std::optional<double> grad_check(const ParamSet& p, const HiddenState& s, const DataState& data,
                                 const ModelConfig& cfg, const Activation& act = {},
                                 std::size_t max_params = 256);

} // namespace mflab
