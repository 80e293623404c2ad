#include "mflab/network/train_log.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace mflab {

std::uint64_t snapshot_every(std::size_t n) { return (n + 49) / 50; }

std::uint64_t horizon_steps(std::size_t n, double T) {
  if (!(T > 0.0)) {
    throw std::domain_error("training horizon T must be positive");
  }
  return static_cast<std::uint64_t>(std::floor(static_cast<double>(n) * T));
}

void TrainLog::write_records_csv(std::ostream& os) const {
  os << "k,t,y_hat,y,loss,mean_feedback,max_drift\n";
  const double nd = static_cast<double>(N);
  for (const auto& r : records) {
    os << r.k << ',' << static_cast<double>(r.k) / nd << ',' << r.y_hat << ',' << r.y << ','
       << r.loss << ',' << r.mean_feedback << ',' << r.max_drift << '\n';
  }
}

void TrainLog::write_functionals_csv(std::ostream& os) const {
  os << "k,t,test_function_id,value\n";
  const double nd = static_cast<double>(N);
  for (const auto& s : functionals) {
    os << s.k << ',' << static_cast<double>(s.k) / nd << ',' << s.test_function_id << ','
       << s.value << '\n';
  }
}

TrainLog run_training(const ModelConfig& cfg, const DynamicsSpec& spec, double T,
                      std::uint64_t data_seed, const TrainOptions& opts) {
  cfg.validate();
  const std::uint64_t steps = horizon_steps(cfg.N, T);
  const std::uint64_t every = snapshot_every(cfg.N);

  TrainLog log;
  log.N = cfg.N;
  ParamSet params = init_params(cfg);
  HiddenState hidden = HiddenState::zeros(cfg.N);
  Rng data_rng = make_rng(data_seed, {0xda7a});
  DataState data = initial_state(spec, data_rng);
  StepWorkspace ws;

  auto snapshot = [&](std::uint64_t k) {
    for (std::size_t id = 0; id < opts.test_functions.size(); ++id) {
      log.functionals.push_back(
          {k, id, g_functional(params.live, opts.test_functions[id], cfg, opts.act)});
    }
    if (opts.keep_param_snapshots) {
      log.param_snapshots.emplace_back(k, params);
    }
  };

  log.records.reserve(steps);
  for (std::uint64_t k = 0; k < steps; ++k) {
    if (k % every == 0) {
      snapshot(k);
    }
    std::optional<double> target;
    if (opts.target == TargetMode::MatchPrediction) {
      const auto next = memory_step(params.live, hidden, data.x, opts.act);
      target = clip_eval(predict(params.live, next.S, cfg), cfg.clip());
    }
    std::optional<ParamSet> before;
    if (opts.check_bounds) {
      before = params;
    }
    const auto r = sgd_tbptt_step_inplace(params, hidden, data, cfg, opts.act, ws, target);
    if (before) {
      const auto bound = step_increment_bounds(*before, cfg, opts.act, spec.c_y(), data.x);
      for (std::size_t i = 0; i < cfg.N; ++i) {
        double dw = 0.0;
        for (std::size_t j = 0; j < cfg.d; ++j) {
          const double v = params.live.w_at(i, j) - before->live.w_at(i, j);
          dw += v * v;
        }
        const double tol = 1e-12;
        if (std::abs(params.live.c[i] - before->live.c[i]) > bound.c * (1 + tol) ||
            std::sqrt(dw) > bound.w * (1 + tol) + 1e-300 ||
            std::abs(params.live.b[i] - before->live.b[i]) > bound.b * (1 + tol) + 1e-300) {
          throw std::logic_error("per-step parameter increment exceeds its sure bound");
        }
      }
    }
    log.records.push_back({k, r.y_hat, r.y, r.loss, r.feedback, max_drift(params)});
    data = step_data(data, spec, data_rng);
  }
  if (steps > 0) {
    snapshot(steps);
  }
  log.final_params = std::move(params);
  return log;
}

} // namespace mflab
