#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mflab/core/activation.hpp"
#include "mflab/core/func_h.hpp"
#include "mflab/core/measure.hpp"
#include "mflab/dynamics/dynamics.hpp"
#include "mflab/network/network.hpp"

namespace mflab {

// The three memory recursions only ever produce ridge functions
// w -> sigma(w^T X_{k-1} + m_{k-1}), so each chain is carried exactly by its
// feedback scalar m_k and the FuncH it currently represents.

enum class ProcessTag { V, HN, H };

struct MemoryChainState {
  ProcessTag tag = ProcessTag::H;
  std::uint64_t k = 0;
  double m = 0.0; // <b' f_k(w'), measure> for the chain's measure
  FuncH fn;       // f_k; the zero function at k = 0

  static MemoryChainState start(ProcessTag tag) { return {tag, 0, 0.0, FuncH{}}; }
};

/// <b' h(w'), measure>.
double feedback_of(const FuncH& h, const MeasureSample& measure, const Activation& act);

/// [varsigma(x, h)](w) = sigma(w^T x + <b' h, measure>).
FuncH varsigma(const DataState& data, const FuncH& h, const MeasureSample& measure,
               const Activation& act);

/// h_{k+1}(w) = sigma(w^T x + m_k), m_{k+1} = <b' h_{k+1}, lambda>.
MemoryChainState step_h(const MemoryChainState& state, std::span<const double> x,
                        const MeasureSample& lambda, const Activation& act);

/// Same recursion against the network's initialization sample lambda^N.
MemoryChainState step_hN(const MemoryChainState& state, std::span<const double> x,
                         const Triples& lambda_n, const Activation& act);

/// m^v_{k+1} = (1/N) sum_j B_{k+1}[j] sigma(W_k[j]^T x + m^v_k). `w_cur`
/// supplies W_k (its c and b are ignored). Throws std::domain_error on a
/// length mismatch.
MemoryChainState step_v(const MemoryChainState& state, std::span<const double> x,
                        std::span<const double> b_next, const Triples& w_cur,
                        const Activation& act);

/// Reusable scratch for chains advanced once per step.
class ChainStepper {
public:
  MemoryChainState step(const MemoryChainState& state, std::span<const double> x,
                        const Triples& measure, const Activation& act);
  MemoryChainState step_v(const MemoryChainState& state, std::span<const double> x,
                          std::span<const double> b_next, const Triples& w_cur,
                          const Activation& act);

private:
  std::vector<double> pre_;
  std::vector<double> val_;
};

struct ErrorDiag {
  double e1 = 0.0; // <b' h^N_k, lambda^N> - <b' h_k, lambda>
  double e2 = 0.0; // <b' v^N_k, lambda^N_k> - <b' h^N_k, lambda^N>
  double gamma1_h1 = 0.0;
  double gamma2_h1 = 0.0;
  std::vector<double> gamma_at_w; // (v^N_k - h_k)(w) at the evaluation points
};

struct ErrorDiagOptions {
  bool h1_norms = true;
};

ErrorDiag error_diag(const MemoryChainState& v, const MemoryChainState& hn,
                     const MemoryChainState& h, const MeasureSample& lambda,
                     const Triples& eval_points, const Activation& act,
                     const ErrorDiagOptions& opts = {});

/// Joint state (x, z, y, h) of the limiting chain with m = <b' h, lambda>.
struct ChainH {
  DataState data;
  FuncH h;
  double m = 0.0;
};

ChainH chain_start(const DynamicsSpec& spec, Rng& rng);
/// H_{k+1} = (g(x,z) + eps, f + eta, varsigma(H_k)).
void advance_chain(ChainH& state, const DynamicsSpec& spec, const MeasureSample& lambda,
                   const Activation& act, Rng& rng, ChainStepper& stepper);

/// K_{x,lambda}(h_test, h) with m_h = <b' h, lambda>.
double kernel_K(std::span<const double> x, double m_h, const FuncH& h_test,
                const MeasureSample& lambda, const Activation& act);

/// K~(Hi, Hj), manifestly symmetric in its arguments.
double kernel_tilde(const ChainH& hi, const ChainH& hj, const MeasureSample& lambda,
                    const Activation& act);

/// Everything about one training step the delta^(1) prediction needs.
struct StepContext {
  std::vector<double> x;
  double residual = 0.0; // psi_N(y_hat) - y
  std::vector<double> s_next;
  std::vector<double> ds_next;
};

/// Runs one in-place training step and records its context.
StepContext training_step_with_context(ParamSet& p, HiddenState& s, const DataState& data,
                                       const ModelConfig& cfg, const Activation& act,
                                       StepWorkspace& ws);

struct IncrementPair {
  double actual;
  double predicted;
};

/// actual = g^N_{k+1}(h) - g^N_k(h), summed unit by unit; predicted is the
/// first-order increment -(alpha/N^2) r sum_i [S^i h(W^i) + (C^i)^2 dS^i grad h(W^i)^T x].
IncrementPair increment_delta1(const Triples& before, const Triples& after,
                               const StepContext& ctx, const FuncH& h_test,
                               const ModelConfig& cfg, const Activation& act);

} // namespace mflab
