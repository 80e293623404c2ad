#include "mflab/network/network.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mflab/simd/kernels.hpp"

namespace mflab {

double ModelConfig::learning_rate() const {
  return alpha / std::pow(static_cast<double>(N), 2.0 - 2.0 * beta);
}

double ModelConfig::output_scale() const {
  return std::pow(static_cast<double>(N), -beta);
}

void ModelConfig::validate() const {
  std::ostringstream os;
  if (N == 0 || d == 0) {
    os << "N and d must be positive";
  } else if (!(beta > 0.5 && beta < 1.0)) {
    os << "beta=" << beta << " outside (1/2, 1)";
  } else if (!(gamma > 0.0 && gamma < (1.0 - beta) / 2.0)) {
    os << "gamma=" << gamma << " outside (0, (1-beta)/2)";
  } else if (!(alpha > 0.0)) {
    os << "alpha must be positive";
  }
  if (!os.str().empty()) {
    throw ConfigError(os.str());
  }
}

ParamSet init_params(const ModelConfig& cfg) {
  return params_from(draw_lambda(cfg.N, cfg.d, cfg.seed));
}

ParamSet params_from(Triples init) {
  ParamSet p;
  p.live = init;
  p.init = std::move(init);
  return p;
}

double feedback_scalar(const Triples& params, std::span<const double> S) {
  return simd::dot(params.b, S) / static_cast<double>(params.size());
}

HiddenState memory_step(const Triples& params, const HiddenState& s, std::span<const double> x,
                        const Activation& act) {
  const std::size_t n = params.size();
  HiddenState out{std::vector<double>(n), s.k + 1};
  std::vector<double> pre(n);
  params.project(x, pre);
  const double m = feedback_scalar(params, s.S);
  simd::sigmoid_eval(pre, m, act.scale(), out.S, std::span<double>{});
  return out;
}

double predict(const Triples& params, std::span<const double> s_next, const ModelConfig& cfg) {
  return cfg.output_scale() * simd::dot(params.c, s_next);
}

double g_functional(const Triples& params, const FuncH& h, const ModelConfig& cfg,
                    const Activation& act) {
  if (h.is_zero()) {
    return 0.0;
  }
  const std::size_t n = params.size();
  std::vector<double> pre(n), val(n);
  params.project(h.a(), pre);
  simd::sigmoid_eval(pre, h.b(), act.scale(), val, std::span<double>{});
  return cfg.output_scale() * simd::dot(params.c, val);
}

StepResult sgd_tbptt_step_inplace(ParamSet& p, HiddenState& s, const DataState& data,
                                  const ModelConfig& cfg, const Activation& act,
                                  StepWorkspace& ws, std::optional<double> target) {
  Triples& th = p.live;
  const std::size_t n = th.size();
  const std::size_t d = th.d;
  ws.pre.resize(n);
  ws.s_next.resize(n);
  ws.ds_next.resize(n);

  // Truncated forward pass.
  th.project(data.x, ws.pre);
  StepResult r;
  r.feedback = feedback_scalar(th, s.S);
  simd::sigmoid_eval(ws.pre, r.feedback, act.scale(), ws.s_next, ws.ds_next);
  r.y_hat = predict(th, ws.s_next, cfg);
  r.y = target.value_or(data.y);
  r.loss = 0.5 * (r.y_hat - r.y) * (r.y_hat - r.y);
  r.residual = clip_eval(r.y_hat, cfg.clip()) - r.y;

  // Truncated backward pass, all factors from step-k parameters.
  const double nd = static_cast<double>(n);
  const double kappa = cfg.alpha / std::pow(nd, 2.0 - cfg.beta);
  const double kappa_b = kappa / nd;
  double b_factor = 0.0;
  if (cfg.b_form == BUpdateForm::Listing) {
    for (std::size_t l = 0; l < n; ++l) {
      b_factor += th.c[l] * s.S[l] * ws.ds_next[l];
    }
  } else {
    b_factor = simd::dot(th.c, ws.ds_next);
  }

  if (r.residual != 0.0) {
    for (std::size_t j = 0; j < d; ++j) {
      double* wj = th.w.data() + j * n;
      const double step = kappa * r.residual * data.x[j];
      for (std::size_t i = 0; i < n; ++i) {
        wj[i] -= step * th.c[i] * ws.ds_next[i];
      }
    }
    const double last = ws.s_next[n - 1];
    for (std::size_t i = 0; i < n; ++i) {
      const double si = cfg.c_index == CUpdateIndex::Own ? ws.s_next[i] : last;
      th.c[i] -= kappa * r.residual * si;
    }
    if (cfg.b_form == BUpdateForm::Listing) {
      const double db = kappa_b * r.residual * b_factor;
      for (std::size_t i = 0; i < n; ++i) {
        th.b[i] -= db;
      }
    } else {
      const double db = kappa_b * r.residual * b_factor;
      for (std::size_t i = 0; i < n; ++i) {
        th.b[i] -= db * s.S[i];
      }
    }
  }

  s.S.swap(ws.s_next);
  s.k += 1;
  return r;
}

StepOutcome sgd_tbptt_step(const ParamSet& p, const HiddenState& s, const DataState& data,
                           const ModelConfig& cfg, const Activation& act) {
  StepOutcome out{p, s, 0.0, 0.0};
  StepWorkspace ws;
  const auto r = sgd_tbptt_step_inplace(out.params, out.hidden, data, cfg, act, ws);
  out.y_hat = r.y_hat;
  out.loss = r.loss;
  return out;
}

IncrementBounds step_increment_bounds(const ParamSet& before, const ModelConfig& cfg,
                                      const Activation& act, double c_y,
                                      std::span<const double> x) {
  const double nd = static_cast<double>(before.size());
  const double kappa = cfg.alpha / std::pow(nd, 2.0 - cfg.beta);
  const double res = cfg.clip().outer_threshold() + c_y;
  double max_c = 0.0, sum_c = 0.0;
  for (double c : before.live.c) {
    max_c = std::max(max_c, std::abs(c));
    sum_c += std::abs(c);
  }
  double xnorm = 0.0;
  for (double v : x) {
    xnorm += v * v;
  }
  xnorm = std::sqrt(xnorm);
  const double cs = act.c_sigma();
  return {kappa * res, kappa * max_c * res * cs * xnorm, kappa / nd * res * cs * sum_c};
}

Drift drift(const ParamSet& p) {
  const std::size_t n = p.size();
  const std::size_t d = p.live.d;
  Drift out;
  out.per_unit.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double wsq = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double dw = p.live.w_at(i, j) - p.init.w_at(i, j);
      wsq += dw * dw;
    }
    const double v = std::abs(p.live.c[i] - p.init.c[i]) + std::sqrt(wsq) +
                     std::abs(p.live.b[i] - p.init.b[i]);
    out.per_unit[i] = v;
    out.max = std::max(out.max, v);
  }
  return out;
}

double max_drift(const ParamSet& p) { return drift(p).max; }

namespace {

// Truncated loss with S_k frozen and psi = identity.
double truncated_loss(const Triples& th, std::span<const double> S, const DataState& data,
                      const ModelConfig& cfg, const Activation& act) {
  const std::size_t n = th.size();
  double m = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    m += th.b[j] * S[j];
  }
  m /= static_cast<double>(n);
  double yhat = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double z = m;
    for (std::size_t j = 0; j < th.d; ++j) {
      z += th.w_at(i, j) * data.x[j];
    }
    yhat += th.c[i] * act.value(z);
  }
  yhat *= cfg.output_scale();
  return 0.5 * (yhat - data.y) * (yhat - data.y);
}

} // namespace

std::optional<double> grad_check(const ParamSet& p, const HiddenState& s, const DataState& data,
                                 const ModelConfig& cfg, const Activation& act,
                                 std::size_t max_params) {
  const std::size_t n = p.size();
  const std::size_t d = p.live.d;
  StepWorkspace ws;
  ParamSet after = p;
  HiddenState hs = s;
  const auto r = sgd_tbptt_step_inplace(after, hs, data, cfg, act, ws);
  if (std::abs(r.y_hat) >= cfg.clip().threshold()) {
    return std::nullopt;
  }
  const double lr = cfg.learning_rate();
  // Fourth-order central stencil; the wide step keeps roundoff below 1e-13.
  constexpr double kStep = 1e-3;

  // Flattened parameter index: [C (n) | W (n*d) | B (n)].
  const std::size_t total = n * (d + 2);
  const std::size_t stride = std::max<std::size_t>(1, total / std::max<std::size_t>(1, max_params));
  double worst = 0.0;
  for (std::size_t idx = 0; idx < total; idx += stride) {
    auto ref = [&](Triples& t) -> double& {
      if (idx < n) {
        return t.c[idx];
      }
      if (idx < n * (d + 1)) {
        return t.w[idx - n];
      }
      return t.b[idx - n * (d + 1)];
    };
    Triples probe = p.live;
    const double analytic = -(ref(after.live) - ref(probe)) / lr;
    const double base = ref(probe);
    auto loss_at = [&](double offset) {
      ref(probe) = base + offset;
      return truncated_loss(probe, s.S, data, cfg, act);
    };
    const double numeric = (8.0 * (loss_at(kStep) - loss_at(-kStep)) -
                            (loss_at(2 * kStep) - loss_at(-2 * kStep))) /
                           (12.0 * kStep);
    const double scale = std::max(std::abs(analytic), std::abs(numeric));
    if (scale > 0.0) {
      worst = std::max(worst, std::abs(analytic - numeric) / scale);
    }
  }
  return worst;
}

} // namespace mflab
