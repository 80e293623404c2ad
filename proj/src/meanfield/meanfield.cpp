#include "mflab/meanfield/meanfield.hpp"

#include <cmath>
#include <stdexcept>

#include "mflab/simd/kernels.hpp"

namespace mflab {

double feedback_of(const FuncH& h, const MeasureSample& measure, const Activation& act) {
  if (h.is_zero()) {
    return 0.0;
  }
  return feedback_integral(h.a(), h.b(), measure, act);
}

FuncH varsigma(const DataState& data, const FuncH& h, const MeasureSample& measure,
               const Activation& act) {
  return FuncH::logistic(data.x, feedback_of(h, measure, act));
}

MemoryChainState ChainStepper::step(const MemoryChainState& state, std::span<const double> x,
                                    const Triples& measure, const Activation& act) {
  const std::size_t n = measure.size();
  if (n == 0) {
    throw std::domain_error("memory chain over an empty measure");
  }
  pre_.resize(n);
  measure.project(x, pre_);
  const auto sums = simd::sigmoid_sums(pre_, measure.b, state.m, act.scale());
  MemoryChainState out;
  out.tag = state.tag;
  out.k = state.k + 1;
  out.fn = FuncH::logistic(std::vector<double>(x.begin(), x.end()), state.m);
  out.m = sums.weighted / static_cast<double>(n);
  return out;
}

MemoryChainState ChainStepper::step_v(const MemoryChainState& state, std::span<const double> x,
                                      std::span<const double> b_next, const Triples& w_cur,
                                      const Activation& act) {
  const std::size_t n = w_cur.size();
  if (b_next.size() != n || n == 0) {
    throw std::domain_error("v-chain parameter lengths do not match");
  }
  pre_.resize(n);
  val_.resize(n);
  w_cur.project(x, pre_);
  // Same kernel sequence as the trainer: activations, then one dot with B.
  simd::sigmoid_eval(pre_, state.m, act.scale(), val_, std::span<double>{});
  MemoryChainState out;
  out.tag = state.tag;
  out.k = state.k + 1;
  out.fn = FuncH::logistic(std::vector<double>(x.begin(), x.end()), state.m);
  out.m = simd::dot(b_next, val_) / static_cast<double>(n);
  return out;
}

MemoryChainState step_h(const MemoryChainState& state, std::span<const double> x,
                        const MeasureSample& lambda, const Activation& act) {
  ChainStepper stepper;
  return stepper.step(state, x, lambda.entries, act);
}

MemoryChainState step_hN(const MemoryChainState& state, std::span<const double> x,
                         const Triples& lambda_n, const Activation& act) {
  ChainStepper stepper;
  return stepper.step(state, x, lambda_n, act);
}

MemoryChainState step_v(const MemoryChainState& state, std::span<const double> x,
                        std::span<const double> b_next, const Triples& w_cur,
                        const Activation& act) {
  ChainStepper stepper;
  return stepper.step_v(state, x, b_next, w_cur, act);
}

ErrorDiag error_diag(const MemoryChainState& v, const MemoryChainState& hn,
                     const MemoryChainState& h, const MeasureSample& lambda,
                     const Triples& eval_points, const Activation& act,
                     const ErrorDiagOptions& opts) {
  ErrorDiag out;
  out.e1 = hn.m - h.m;
  out.e2 = v.m - hn.m;
  if (opts.h1_norms) {
    out.gamma1_h1 = h1_distance_sq(hn.fn, h.fn, lambda, act);
    out.gamma2_h1 = h1_distance_sq(v.fn, hn.fn, lambda, act);
  }
  const std::size_t n = eval_points.size();
  out.gamma_at_w.resize(n);
  std::vector<double> w(eval_points.d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < eval_points.d; ++j) {
      w[j] = eval_points.w_at(i, j);
    }
    out.gamma_at_w[i] = v.fn.value(w, act) - h.fn.value(w, act);
  }
  return out;
}

ChainH chain_start(const DynamicsSpec& spec, Rng& rng) {
  return {initial_state(spec, rng), FuncH{}, 0.0};
}

void advance_chain(ChainH& state, const DynamicsSpec& spec, const MeasureSample& lambda,
                   const Activation& act, Rng& rng, ChainStepper& stepper) {
  MemoryChainState mc{ProcessTag::H, state.data.k, state.m, state.h};
  auto next = stepper.step(mc, state.data.x, lambda.entries, act);
  state.h = std::move(next.fn);
  state.m = next.m;
  state.data = step_data(state.data, spec, rng);
}

double kernel_K(std::span<const double> x, double m_h, const FuncH& h_test,
                const MeasureSample& lambda, const Activation& act) {
  if (h_test.is_zero()) {
    return 0.0;
  }
  const Triples& t = lambda.entries;
  const std::size_t n = t.size();
  std::vector<double> pre(n), sig(n), dsig(n), hv(n), hdir(n);
  t.project(x, pre);
  simd::sigmoid_eval(pre, m_h, act.scale(), sig, dsig);
  h_test.evaluate_on(t, x, act, hv, hdir);
  double acc = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    acc += sig[l] * hv[l] + t.c[l] * t.c[l] * dsig[l] * hdir[l];
  }
  return acc / static_cast<double>(n);
}

double kernel_tilde(const ChainH& hi, const ChainH& hj, const MeasureSample& lambda,
                    const Activation& act) {
  const Triples& t = lambda.entries;
  const std::size_t n = t.size();
  std::vector<double> pre(n), si(n), di(n), sj(n), dj(n);
  t.project(hi.data.x, pre);
  simd::sigmoid_eval(pre, hi.m, act.scale(), si, di);
  t.project(hj.data.x, pre);
  simd::sigmoid_eval(pre, hj.m, act.scale(), sj, dj);
  double xx = 0.0;
  for (std::size_t j = 0; j < hi.data.x.size(); ++j) {
    xx += hi.data.x[j] * hj.data.x[j];
  }
  double acc = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    acc += si[l] * sj[l] + t.c[l] * t.c[l] * (di[l] * dj[l]) * xx;
  }
  return acc / static_cast<double>(n);
}

StepContext training_step_with_context(ParamSet& p, HiddenState& s, const DataState& data,
                                       const ModelConfig& cfg, const Activation& act,
                                       StepWorkspace& ws) {
  const auto r = sgd_tbptt_step_inplace(p, s, data, cfg, act, ws);
  StepContext ctx;
  ctx.x = data.x;
  ctx.residual = r.residual;
  ctx.s_next = s.S;
  ctx.ds_next = ws.ds_next;
  return ctx;
}

IncrementPair increment_delta1(const Triples& before, const Triples& after,
                               const StepContext& ctx, const FuncH& h_test,
                               const ModelConfig& cfg, const Activation& act) {
  if (h_test.is_zero()) {
    return {0.0, 0.0};
  }
  const std::size_t n = before.size();
  std::vector<double> hb(n), dirb(n), ha(n), dira(n);
  h_test.evaluate_on(before, ctx.x, act, hb, dirb);
  h_test.evaluate_on(after, ctx.x, act, ha, dira);
  double actual = 0.0;
  double first_order = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    actual += after.c[i] * ha[i] - before.c[i] * hb[i];
    first_order += ctx.s_next[i] * hb[i] +
                   before.c[i] * before.c[i] * ctx.ds_next[i] * dirb[i];
  }
  const double nd = static_cast<double>(n);
  return {cfg.output_scale() * actual, -(cfg.alpha / (nd * nd)) * ctx.residual * first_order};
}

} // namespace mflab
