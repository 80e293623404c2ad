#include "mflab/harness/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "mflab/harness/csv.hpp"
#include "mflab/harness/empirical.hpp"
#include "mflab/harness/pool.hpp"
#include "mflab/meanfield/meanfield.hpp"
#include "mflab/network/train_log.hpp"

namespace mflab {

namespace fs = std::filesystem;

bool ExperimentResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

void ExperimentResult::add(std::string name, bool pass, std::string detail) {
  checks.push_back({std::move(name), pass, std::move(detail)});
}

std::vector<std::uint64_t> halving_schedule(std::uint64_t steps) {
  std::vector<std::uint64_t> s;
  for (std::uint64_t t = steps; t >= 1; t /= 2) {
    s.push_back(t);
  }
  std::reverse(s.begin(), s.end());
  return s;
}

namespace {

struct Context {
  const ExperimentConfig& cfg;
  CsvProvenance prov;
  std::ostream* log;

  fs::path file(const std::string& name) const { return fs::path(cfg.out_dir) / name; }
  void say(const std::string& msg) const {
    if (log) {
      *log << "[" << prov.command << "] " << msg << '\n';
      log->flush();
    }
  }
};

Context open_context(const ExperimentConfig& cfg, std::ostream* log) {
  const auto v = validate_config(cfg);
  Context ctx{cfg, {experiment_name(cfg.experiment), cfg.hash_hex(), cfg.seed, v.overridden}, log};
  if (v.overridden) {
    ctx.say("assumptions violated, continuing by request: " + v.report.summary());
  }
  return ctx;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::string list(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    s += (i ? ", " : "") + fmt(v[i]);
  }
  return s + "]";
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) {
      return false;
    }
  }
  return true;
}

bool non_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] <= v[i - 1])) {
      return false;
    }
  }
  return true;
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// OLS slope for three or more points, the two-point slope otherwise.
double grid_slope(const std::vector<std::size_t>& N, const std::vector<double>& v, RateFit* fit) {
  std::vector<RatePoint> pts;
  for (std::size_t i = 0; i < N.size(); ++i) {
    pts.push_back({static_cast<double>(N[i]), v[i]});
  }
  if (pts.size() >= 3) {
    const auto f = fit_rate(pts);
    if (fit) {
      *fit = f;
    }
    return f.slope;
  }
  if (pts.size() == 2 && pts[0].value > 0.0 && pts[1].value > 0.0) {
    const double slope = std::log(pts[1].value / pts[0].value) / std::log(pts[1].n / pts[0].n);
    if (fit) {
      *fit = {slope, std::log(pts[0].value) - slope * std::log(pts[0].n), 1.0};
    }
    return slope;
  }
  return std::nan("");
}

void write_fit(const Context& ctx, ExperimentResult& res, const std::string& name,
               const std::vector<std::tuple<std::string, double, double, double, double, bool>>& rows) {
  CsvWriter w(ctx.file(name), ctx.prov,
              {"quantity", "slope", "intercept", "r_squared", "bound", "pass"});
  for (const auto& [q, slope, intercept, r2, bound, pass] : rows) {
    w.row(q, slope, intercept, r2, bound, pass ? 1 : 0);
  }
  res.files.push_back(w.path());
}

} // namespace

// ---------------------------------------------------------------- ergodicity

ErgodicityResult run_ergodicity(const ExperimentConfig& cfg, std::ostream* log) {
  const auto ctx = open_context(cfg, log);
  const auto spec = cfg.dynamics_spec();
  const auto act = cfg.activation();
  const auto schedule = halving_schedule(cfg.steps);
  const std::size_t nN = cfg.N_grid.size();
  const std::size_t P = cfg.paths;

  struct PathOut {
    std::vector<double> avg1; // per schedule entry
    std::vector<double> avg2;
    std::vector<double> final_values;
  };
  std::vector<PathOut> items(nN * P);

  parallel_for(items.size(), cfg.jobs, [&](std::size_t item) {
    const std::size_t n = item / P;
    const std::size_t path = item % P;
    const std::size_t N = cfg.N_grid[n];
    const auto theta_seed = cfg.shared_theta ? derive_seed(cfg.seed, {0xe0, N})
                                             : derive_seed(cfg.seed, {0xe0, N, path});
    const ParamSet params = init_params(cfg.model(N, theta_seed));
    Rng rng = make_rng(cfg.seed, {0xe1, path});
    DataState data = initial_state(spec, rng);
    HiddenState s = HiddenState::zeros(N);
    PathOut out;
    double sum1 = 0.0;
    double sum2 = 0.0;
    std::size_t next = 0;
    for (std::uint64_t k = 1; k <= cfg.steps; ++k) {
      s = memory_step(params.live, s, data.x, act);
      data = step_data(data, spec, rng);
      for (double v : s.S) {
        sum1 += v;
        sum2 += v * v;
      }
      if (next < schedule.size() && schedule[next] == k) {
        const double denom = static_cast<double>(N) * static_cast<double>(k);
        out.avg1.push_back(sum1 / denom);
        out.avg2.push_back(sum2 / denom);
        ++next;
      }
    }
    out.final_values = std::move(s.S);
    items[item] = std::move(out);
  });

  ErgodicityResult res;
  res.command = ctx.prov.command;
  res.N = cfg.N_grid;
  res.schedule = schedule;

  CsvWriter hist(ctx.file("ergodicity_hist.csv"), ctx.prov,
                 {"N", "scope", "path", "bin", "bin_lo", "bin_hi", "count", "density"});
  CsvWriter tavg(ctx.file("ergodicity_timeavg.csv"), ctx.prov,
                 {"N", "p", "scope", "path", "T", "value"});
  CsvWriter band(ctx.file("ergodicity_band.csv"), ctx.prov,
                 {"N", "p", "T", "min", "max", "mean", "width"});

  std::vector<std::vector<double>> pooled(nN);
  auto emit_hist = [&](std::size_t N, const char* scope, long long path,
                       const std::vector<double>& values) {
    const auto h = histogram(values, 200, 0.0, 1.0);
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
      hist.row(N, scope, path, b, h.lo + static_cast<double>(b) * h.bin_width(),
               h.lo + static_cast<double>(b + 1) * h.bin_width(), h.counts[b], h.density(b));
    }
  };

  for (std::size_t n = 0; n < nN; ++n) {
    const std::size_t N = cfg.N_grid[n];
    res.overall.emplace_back(2, std::vector<double>(schedule.size(), 0.0));
    res.band.emplace_back(2, 0.0);
    for (std::size_t path = 0; path < P; ++path) {
      const auto& it = items[n * P + path];
      emit_hist(N, "path", static_cast<long long>(path), it.final_values);
      pooled[n].insert(pooled[n].end(), it.final_values.begin(), it.final_values.end());
      for (std::size_t si = 0; si < schedule.size(); ++si) {
        tavg.row(N, 1, "path", path, schedule[si], it.avg1[si]);
        tavg.row(N, 2, "path", path, schedule[si], it.avg2[si]);
        res.overall[n][0][si] += it.avg1[si] / static_cast<double>(P);
        res.overall[n][1][si] += it.avg2[si] / static_cast<double>(P);
      }
    }
    emit_hist(N, "overall", -1, pooled[n]);
    for (std::size_t si = 0; si < schedule.size(); ++si) {
      tavg.row(N, 1, "overall", -1, schedule[si], res.overall[n][0][si]);
      tavg.row(N, 2, "overall", -1, schedule[si], res.overall[n][1][si]);
    }
    for (int p = 0; p < 2; ++p) {
      double lo = 1e300;
      double hi = -1e300;
      for (std::size_t path = 0; path < P; ++path) {
        const auto& it = items[n * P + path];
        const double v = p == 0 ? it.avg1.back() : it.avg2.back();
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      res.band[n][p] = hi - lo;
      band.row(N, p + 1, schedule.back(), lo, hi, res.overall[n][p].back(), hi - lo);
    }
    ctx.say("N=" + std::to_string(N) + " band p1=" + fmt(res.band[n][0]) +
            " p2=" + fmt(res.band[n][1]));
  }

  CsvWriter w1(ctx.file("ergodicity_w1.csv"), ctx.prov, {"N_a", "N_b", "w1"});
  for (std::size_t n = 0; n + 1 < nN; ++n) {
    res.w1.push_back(wasserstein1(pooled[n], pooled[n + 1]));
    w1.row(cfg.N_grid[n], cfg.N_grid[n + 1], res.w1.back());
  }
  res.files = {hist.path(), tavg.path(), band.path(), w1.path()};

  if (nN >= 3) {
    res.add("w1_decreasing", strictly_decreasing(res.w1), "W1 " + list(res.w1));
  }
  if (nN >= 2) {
    for (int p = 0; p < 2; ++p) {
      const double first = res.band.front()[p];
      const double last = res.band.back()[p];
      res.add("band_shrinks_p" + std::to_string(p + 1), last < first,
              "width N=" + std::to_string(cfg.N_grid.front()) + ": " + fmt(first) +
                  ", N=" + std::to_string(cfg.N_grid.back()) + ": " + fmt(last));
    }
  }
  if (schedule.size() >= 4) {
    const std::size_t S = schedule.size();
    for (std::size_t n = 0; n < nN; ++n) {
      for (int p = 0; p < 2; ++p) {
        const auto& a = res.overall[n][p];
        // Differences over the last three doublings, oldest first.
        std::vector<double> d = {std::abs(a[S - 3] - a[S - 4]), std::abs(a[S - 2] - a[S - 3]),
                                 std::abs(a[S - 1] - a[S - 2])};
        res.add("timeavg_settles_N" + std::to_string(cfg.N_grid[n]) + "_p" +
                    std::to_string(p + 1),
                strictly_decreasing(d), "|A_T - A_T/2| " + list(d));
      }
    }
  }
  return res;
}

// --------------------------------------------------------------------- drift

DriftResult run_drift(const ExperimentConfig& cfg, std::ostream* log) {
  const auto ctx = open_context(cfg, log);
  const auto spec = cfg.dynamics_spec();
  const std::size_t nN = cfg.N_grid.size();
  const std::size_t S = cfg.seeds;
  std::vector<double> drift_of(nN * S);

  TrainOptions opts;
  opts.act = cfg.activation();
  parallel_for(drift_of.size(), cfg.jobs, [&](std::size_t item) {
    const std::size_t n = item / S;
    const std::size_t s = item % S;
    const std::size_t N = cfg.N_grid[n];
    const auto model = cfg.model(N, derive_seed(cfg.seed, {0xd7, N, s}));
    const auto log_ = run_training(model, spec, cfg.T, derive_seed(cfg.seed, {0xd8, s}), opts);
    double m = max_drift(log_.final_params);
    for (const auto& r : log_.records) {
      m = std::max(m, r.max_drift);
    }
    drift_of[item] = m;
  });

  DriftResult res;
  res.command = ctx.prov.command;
  res.N = cfg.N_grid;
  CsvWriter raw(ctx.file("drift.csv"), ctx.prov, {"N", "seed", "max_drift"});
  CsvWriter sum(ctx.file("drift_summary.csv"), ctx.prov, {"N", "mean_max_drift"});
  for (std::size_t n = 0; n < nN; ++n) {
    std::vector<double> v(drift_of.begin() + n * S, drift_of.begin() + (n + 1) * S);
    for (std::size_t s = 0; s < S; ++s) {
      raw.row(cfg.N_grid[n], s, v[s]);
    }
    res.mean_max_drift.push_back(mean(v));
    sum.row(cfg.N_grid[n], res.mean_max_drift.back());
    ctx.say("N=" + std::to_string(cfg.N_grid[n]) + " mean max drift " +
            fmt(res.mean_max_drift.back()));
  }
  res.files = {raw.path(), sum.path()};

  const double bound = -(1.0 - cfg.beta - cfg.gamma) + 0.3;
  const double slope = grid_slope(res.N, res.mean_max_drift, &res.fit);
  res.fit.slope = slope;
  write_fit(ctx, res, "drift_fit.csv",
            {{"max_drift", slope, res.fit.intercept, res.fit.r_squared, bound, slope <= bound}});
  res.add("drift_slope", slope <= bound, "slope " + fmt(slope) + " <= " + fmt(bound));
  res.add("drift_decreasing", strictly_decreasing(res.mean_max_drift),
          "means " + list(res.mean_max_drift));
  return res;
}

// --------------------------------------------------------------- gamma rates

GammaRatesResult run_gamma_rates(const ExperimentConfig& cfg, std::ostream* log) {
  const auto ctx = open_context(cfg, log);
  const auto spec = cfg.dynamics_spec();
  const auto act = cfg.activation();
  const std::size_t nN = cfg.N_grid.size();
  const std::size_t S = cfg.seeds;
  std::uint64_t kmax = 0;
  for (auto N : cfg.N_grid) {
    kmax = std::max(kmax, horizon_steps(N, cfg.T));
  }

  struct Row {
    double e1_sq = 0.0;
    double e2_sq = 0.0;
    double gamma1_h1 = 0.0;
    double gamma2_h1 = 0.0;
  };
  struct TraceRow {
    std::size_t N;
    std::uint64_t k;
    double e1, e2, g1, g2;
  };
  std::vector<Row> rows(nN * S);
  std::vector<TraceRow> trace;

  parallel_for(S, cfg.jobs, [&](std::size_t s) {
    const auto lambda = sample_lambda(cfg.lambda_samples, 1, derive_seed(cfg.seed, {0x1a, s}));
    Rng rng = make_rng(cfg.seed, {0x9a, s});
    std::vector<DataState> path;
    path.reserve(kmax + 1);
    path.push_back(initial_state(spec, rng));
    for (std::uint64_t k = 0; k < kmax; ++k) {
      path.push_back(step_data(path.back(), spec, rng));
    }
    // The h chain depends only on the data path, so one pass serves every N.
    ChainStepper stepper;
    std::vector<double> mh(kmax + 1, 0.0);
    {
      auto st = MemoryChainState::start(ProcessTag::H);
      for (std::uint64_t k = 0; k < kmax; ++k) {
        st = stepper.step(st, path[k].x, lambda.entries, act);
        mh[k + 1] = st.m;
      }
    }
    auto h_fn = [&](std::uint64_t k) {
      return k == 0 ? FuncH{} : FuncH::logistic(path[k - 1].x, mh[k - 1]);
    };

    for (std::size_t n = 0; n < nN; ++n) {
      const std::size_t N = cfg.N_grid[n];
      const auto model = cfg.model(N, derive_seed(cfg.seed, {0x9b, N, s}));
      ParamSet p = init_params(model);
      HiddenState hidden = HiddenState::zeros(N);
      StepWorkspace ws;
      auto hn = MemoryChainState::start(ProcessTag::HN);
      auto v = MemoryChainState::start(ProcessTag::V);
      Triples w_prev;
      const std::uint64_t steps = horizon_steps(N, cfg.T);
      const std::uint64_t every = snapshot_every(N);
      Row r;
      auto record_trace = [&](std::uint64_t k) {
        if (s != 0) {
          return;
        }
        const double g1 = h1_distance_sq(hn.fn, h_fn(k), lambda, act);
        const double g2 = h1_distance_sq(v.fn, hn.fn, lambda, act);
        trace.push_back({N, k, hn.m - mh[k], v.m - hn.m, g1, g2});
      };
      record_trace(0);
      for (std::uint64_t k = 0; k < steps; ++k) {
        w_prev = p.live;
        sgd_tbptt_step_inplace(p, hidden, path[k], model, act, ws);
        hn = stepper.step(hn, path[k].x, p.init, act);
        v = stepper.step_v(v, path[k].x, p.live.b, w_prev, act);
        const double e1 = hn.m - mh[k + 1];
        const double e2 = v.m - hn.m;
        r.e1_sq = std::max(r.e1_sq, e1 * e1);
        r.e2_sq = std::max(r.e2_sq, e2 * e2);
        if ((k + 1) % every == 0 || k + 1 == steps) {
          record_trace(k + 1);
        }
      }
      r.gamma1_h1 = h1_distance_sq(hn.fn, h_fn(steps), lambda, act);
      r.gamma2_h1 = h1_distance_sq(v.fn, hn.fn, lambda, act);
      rows[n * S + s] = r;
    }
    if (log && s % 10 == 0) {
      ctx.say("seed " + std::to_string(s) + " done");
    }
  });

  GammaRatesResult res;
  res.command = ctx.prov.command;
  res.N = cfg.N_grid;
  CsvWriter raw(ctx.file("gamma_rates.csv"), ctx.prov,
                {"N", "seed", "max_e1_sq", "max_e2_sq", "gamma1_h1", "gamma2_h1"});
  CsvWriter sum(ctx.file("gamma_rates_summary.csv"), ctx.prov,
                {"N", "mean_max_e1_sq", "mean_max_e2_sq", "mean_gamma1_h1", "mean_gamma2_h1"});
  CsvWriter tr(ctx.file("gamma_rates_trace.csv"), ctx.prov,
               {"N", "k", "seed", "e1", "e2", "e1_sq", "e2_sq", "gamma1_h1", "gamma2_h1"});
  for (std::size_t n = 0; n < nN; ++n) {
    std::vector<double> a, b, g1, g2;
    for (std::size_t s = 0; s < S; ++s) {
      const auto& r = rows[n * S + s];
      raw.row(cfg.N_grid[n], s, r.e1_sq, r.e2_sq, r.gamma1_h1, r.gamma2_h1);
      a.push_back(r.e1_sq);
      b.push_back(r.e2_sq);
      g1.push_back(r.gamma1_h1);
      g2.push_back(r.gamma2_h1);
    }
    res.mean_e1_sq.push_back(mean(a));
    res.mean_e2_sq.push_back(mean(b));
    sum.row(cfg.N_grid[n], mean(a), mean(b), mean(g1), mean(g2));
    ctx.say("N=" + std::to_string(cfg.N_grid[n]) + " e1^2 " + fmt(mean(a)) + " e2^2 " +
            fmt(mean(b)));
  }
  for (const auto& t : trace) {
    tr.row(t.N, t.k, 0, t.e1, t.e2, t.e1 * t.e1, t.e2 * t.e2, t.g1, t.g2);
  }
  res.files = {raw.path(), sum.path(), tr.path()};

  const double bound1 = -0.7;
  const double bound2 = -(2.0 - 2.0 * cfg.beta - 2.0 * cfg.gamma) + 0.3;
  const double s1 = grid_slope(res.N, res.mean_e1_sq, &res.fit_e1);
  const double s2 = grid_slope(res.N, res.mean_e2_sq, &res.fit_e2);
  res.fit_e1.slope = s1;
  res.fit_e2.slope = s2;
  write_fit(ctx, res, "gamma_rates_fit.csv",
            {{"e1_sq", s1, res.fit_e1.intercept, res.fit_e1.r_squared, bound1, s1 <= bound1},
             {"e2_sq", s2, res.fit_e2.intercept, res.fit_e2.r_squared, bound2, s2 <= bound2}});
  res.add("e1_slope", s1 <= bound1, "slope " + fmt(s1) + " <= " + fmt(bound1));
  res.add("e2_slope", s2 <= bound2, "slope " + fmt(s2) + " <= " + fmt(bound2));
  res.add("e1_decreasing", strictly_decreasing(res.mean_e1_sq), list(res.mean_e1_sq));
  res.add("e2_decreasing", strictly_decreasing(res.mean_e2_sq), list(res.mean_e2_sq));
  return res;
}

// ----------------------------------------------------------------- increment

IncrementResult run_increment(const ExperimentConfig& cfg, std::ostream* log) {
  const auto ctx = open_context(cfg, log);
  const auto spec = cfg.dynamics_spec();
  const auto act = cfg.activation();
  const auto tests = default_test_functions(1);
  const std::size_t nN = cfg.N_grid.size();
  const std::size_t S = cfg.seeds;
  const std::size_t H = tests.size();
  std::vector<double> err(nN * S * H, 0.0);
  std::vector<double> mag(nN * S * H, 0.0);

  parallel_for(nN * S, cfg.jobs, [&](std::size_t item) {
    const std::size_t n = item / S;
    const std::size_t s = item % S;
    const std::size_t N = cfg.N_grid[n];
    const auto model = cfg.model(N, derive_seed(cfg.seed, {0x1c, N, s}));
    ParamSet p = init_params(model);
    HiddenState hidden = HiddenState::zeros(N);
    StepWorkspace ws;
    Rng rng = make_rng(cfg.seed, {0x1d, s});
    DataState data = initial_state(spec, rng);
    Triples before;
    const std::uint64_t steps = horizon_steps(N, cfg.T);
    for (std::uint64_t k = 0; k < steps; ++k) {
      before = p.live;
      const auto sc = training_step_with_context(p, hidden, data, model, act, ws);
      for (std::size_t h = 0; h < H; ++h) {
        const auto pr = increment_delta1(before, p.live, sc, tests[h], model, act);
        auto& e = err[item * H + h];
        auto& m = mag[item * H + h];
        e = std::max(e, std::abs(pr.actual - pr.predicted));
        m = std::max(m, std::abs(pr.actual));
      }
      data = step_data(data, spec, rng);
    }
  });

  IncrementResult res;
  res.command = ctx.prov.command;
  res.N = cfg.N_grid;
  CsvWriter raw(ctx.file("increment.csv"), ctx.prov,
                {"N", "seed", "test_function_id", "max_abs_err", "max_abs_increment"});
  CsvWriter sum(ctx.file("increment_summary.csv"), ctx.prov, {"N", "mean_max_abs_err"});
  for (std::size_t n = 0; n < nN; ++n) {
    std::vector<double> per_seed;
    for (std::size_t s = 0; s < S; ++s) {
      double m = 0.0;
      for (std::size_t h = 0; h < H; ++h) {
        const std::size_t i = (n * S + s) * H + h;
        raw.row(cfg.N_grid[n], s, h, err[i], mag[i]);
        m = std::max(m, err[i]);
      }
      per_seed.push_back(m);
    }
    res.mean_max_err.push_back(mean(per_seed));
    sum.row(cfg.N_grid[n], res.mean_max_err.back());
    ctx.say("N=" + std::to_string(cfg.N_grid[n]) + " max |dg - delta1| " +
            fmt(res.mean_max_err.back()));
  }
  res.files = {raw.path(), sum.path()};

  const double bound = -(3.0 - cfg.beta - 2.0 * cfg.gamma) + 0.5;
  RateFit fit;
  res.slope = grid_slope(res.N, res.mean_max_err, &fit);
  write_fit(ctx, res, "increment_fit.csv",
            {{"max_abs_err", res.slope, fit.intercept, fit.r_squared, bound, res.slope <= bound}});
  if (nN >= 2) {
    res.add("increment_slope", res.slope <= bound,
            "slope " + fmt(res.slope) + " <= " + fmt(bound));
    res.add("increment_decreasing", strictly_decreasing(res.mean_max_err),
            list(res.mean_max_err));
  }
  return res;
}

// ----------------------------------------------------------------------- ntk

NtkResult run_ntk(const ExperimentConfig& cfg, std::ostream* log) {
  const auto ctx = open_context(cfg, log);
  const auto spec = cfg.dynamics_spec();
  const auto act = cfg.activation();
  const auto tests = default_test_functions(1);
  const std::size_t nN = cfg.N_grid.size();
  const std::size_t S = cfg.seeds;
  const std::size_t H = tests.size();

  // The limit curve does not depend on N and is computed once.
  const auto lambda = sample_lambda(cfg.lambda_samples, 1, derive_seed(cfg.seed, {0x47}));
  MuSampling ms;
  ms.M = cfg.M;
  ms.burn_in = cfg.burn_in;
  ms.stride = cfg.stride;
  ms.tol = cfg.burn_in_tol;
  ms.harvest = cfg.harvest;
  ms.seed = derive_seed(cfg.seed, {0x48});
  const auto mu = sample_mu(spec, lambda, act, ms);
  const auto gram = build_gram(mu, lambda, act);
  const double dt = std::min(cfg.dt, stable_dt(gram, cfg.alpha));
  const auto traj = integrate(gram, cfg.alpha, cfg.T, dt);
  std::vector<std::vector<double>> columns;
  for (const auto& h : tests) {
    columns.push_back(kernel_column(mu, h, lambda, act));
  }
  ctx.say("limit trajectory ready (M=" + std::to_string(cfg.M) + ")");

  std::vector<double> sup_err(nN * S, 0.0);
  TrainOptions opts;
  opts.act = act;
  opts.test_functions = tests;
  parallel_for(nN * S, cfg.jobs, [&](std::size_t item) {
    const std::size_t n = item / S;
    const std::size_t s = item % S;
    const std::size_t N = cfg.N_grid[n];
    const auto model = cfg.model(N, derive_seed(cfg.seed, {0x49, N, s}));
    const auto tl = run_training(model, spec, cfg.T, derive_seed(cfg.seed, {0x4a, s}), opts);
    double e = 0.0;
    for (const auto& f : tl.functionals) {
      const double t = std::min(cfg.T, static_cast<double>(f.k) / static_cast<double>(N));
      const double g = g_limit_eval_column(traj, gram, columns[f.test_function_id], t);
      e = std::max(e, std::abs(f.value - g));
    }
    sup_err[item] = e;
  });

  NtkResult res;
  res.command = ctx.prov.command;
  res.N = cfg.N_grid;
  // Initialization term g^N_0(h) over fresh parameter draws.
  for (std::size_t n = 0; n < nN; ++n) {
    const std::size_t N = cfg.N_grid[n];
    std::vector<double> sq(cfg.init_seeds, 0.0);
    parallel_for(cfg.init_seeds, cfg.jobs, [&](std::size_t r) {
      const auto model = cfg.model(N, derive_seed(cfg.seed, {0x4b, N, r}));
      const auto p = init_params(model);
      for (const auto& h : tests) {
        const double g = g_functional(p.live, h, model, act);
        sq[r] += g * g;
      }
    });
    res.init_rms.push_back(std::sqrt(mean(sq) / static_cast<double>(H)));
  }

  CsvWriter raw(ctx.file("ntk.csv"), ctx.prov, {"N", "seed", "sup_abs_err"});
  CsvWriter sum(ctx.file("ntk_summary.csv"), ctx.prov, {"N", "mean_sup_abs_err", "init_rms"});
  for (std::size_t n = 0; n < nN; ++n) {
    std::vector<double> v(sup_err.begin() + n * S, sup_err.begin() + (n + 1) * S);
    for (std::size_t s = 0; s < S; ++s) {
      raw.row(cfg.N_grid[n], s, v[s]);
    }
    res.mean_sup_err.push_back(mean(v));
    sum.row(cfg.N_grid[n], res.mean_sup_err.back(), res.init_rms[n]);
    ctx.say("N=" + std::to_string(cfg.N_grid[n]) + " mean sup error " +
            fmt(res.mean_sup_err.back()) + " init rms " + fmt(res.init_rms[n]));
  }
  CsvWriter lim(ctx.file("ntk_limit.csv"), ctx.prov, {"t", "test_function_id", "g_t"});
  const std::size_t every = std::max<std::size_t>(1, traj.times.size() / 100);
  for (std::size_t r = 0; r < traj.times.size(); r += every) {
    for (std::size_t h = 0; h < H; ++h) {
      lim.row(traj.times[r], h, g_limit_eval_column(traj, gram, columns[h], traj.times[r]));
    }
  }
  res.files = {raw.path(), sum.path(), lim.path()};

  const double target = -(cfg.beta - 0.5);
  const double slope = grid_slope(res.N, res.init_rms, &res.init_fit);
  res.init_fit.slope = slope;
  const bool init_ok = std::abs(slope - target) <= 0.1;
  write_fit(ctx, res, "ntk_fit.csv",
            {{"init_rms", slope, res.init_fit.intercept, res.init_fit.r_squared, target, init_ok}});
  res.add("sup_error_non_increasing", non_increasing(res.mean_sup_err),
          list(res.mean_sup_err));
  if (nN >= 2) {
    res.add("init_rms_rate", init_ok,
            "slope " + fmt(slope) + " within 0.1 of " + fmt(target));
  }
  return res;
}

// ----------------------------------------------------------------------- ode

OdeResult run_ode(const ExperimentConfig& cfg, std::ostream* log) {
  const auto ctx = open_context(cfg, log);
  const auto spec = cfg.dynamics_spec();
  const auto act = cfg.activation();
  const auto lambda = sample_lambda(cfg.lambda_samples, 1, derive_seed(cfg.seed, {0x0d}));
  MuSampling ms;
  ms.M = cfg.M;
  ms.burn_in = cfg.burn_in;
  ms.stride = cfg.stride;
  ms.tol = cfg.burn_in_tol;
  ms.harvest = cfg.harvest;
  ms.seed = derive_seed(cfg.seed, {0x0e});
  const auto mu = sample_mu(spec, lambda, act, ms);
  auto gram = build_gram(mu, lambda, act);
  if (cfg.zero_targets) {
    gram.y.setZero();
  }
  ctx.say("gram built (M=" + std::to_string(cfg.M) + ")");

  OdeResult res;
  res.command = ctx.prov.command;
  const ClosedForm oracle(gram, cfg.alpha);
  res.min_eig = oracle.eigenvalues().minCoeff();
  res.trace = gram.K.trace();
  const bool psd = res.min_eig >= -1e-8 * res.trace;

  const double dt = std::min(cfg.dt, stable_dt(gram, cfg.alpha));
  const auto traj = integrate(gram, cfg.alpha, cfg.ode_T, dt);
  const auto curve = loss_curve(traj, gram);
  res.monotone = loss_monotone(curve);
  res.loss0 = curve.front().loss;
  res.lossT = curve.back().loss;
  res.full_oracle_err = max_abs_difference(traj, oracle.on_grid(traj.times));

  const auto m = static_cast<Eigen::Index>(std::min(cfg.oracle_M, cfg.M));
  KernelGram sub;
  sub.K = gram.K.topLeftCorner(m, m);
  sub.y = gram.y.head(m);
  sub.sample_seed = gram.sample_seed;
  const double sub_dt = std::min(cfg.dt, stable_dt(sub, cfg.alpha));
  const auto sub_traj = integrate(sub, cfg.alpha, cfg.ode_T, sub_dt);
  res.oracle_err = max_abs_difference(sub_traj, ClosedForm(sub, cfg.alpha).on_grid(sub_traj.times));

  CsvWriter lc(ctx.file("ode_loss.csv"), ctx.prov, {"t", "loss"});
  for (const auto& p : curve) {
    lc.row(p.t, p.loss);
  }
  CsvWriter sm(ctx.file("ode_summary.csv"), ctx.prov,
               {"M", "lambda_samples", "alpha", "T", "dt", "min_eig", "trace", "psd", "monotone",
                "oracle_M", "oracle_max_err", "full_oracle_max_err", "loss0", "lossT"});
  sm.row(cfg.M, cfg.lambda_samples, cfg.alpha, cfg.ode_T, dt, res.min_eig, res.trace, psd ? 1 : 0,
         res.monotone ? 1 : 0, m, res.oracle_err, res.full_oracle_err, res.loss0, res.lossT);
  res.files = {lc.path(), sm.path()};

  res.add("gram_psd", psd, "min eig " + fmt(res.min_eig) + ", trace " + fmt(res.trace));
  res.add("rk4_matches_closed_form", res.oracle_err < 1e-6,
          "max error " + fmt(res.oracle_err) + " at M=" + std::to_string(m));
  res.add("loss_monotone", res.monotone,
          "loss " + fmt(res.loss0) + " -> " + fmt(res.lossT));
  return res;
}

// ------------------------------------------------------------------ validate

ValidateResult run_validate(const ExperimentConfig& cfg, std::ostream* log) {
  cfg.model(1, cfg.seed).validate();
  ValidateResult res;
  res.command = "validate";
  const auto spec = cfg.dynamics_spec();
  res.report = validate_assumptions(spec, cfg.activation(), ScalingWindow{cfg.beta, cfg.gamma});
  if (log) {
    *log << "[validate] " << spec.name << ": " << res.report.summary() << '\n';
  }
  const CsvProvenance prov{"validate", cfg.hash_hex(), cfg.seed, false};
  CsvWriter w(fs::path(cfg.out_dir) / "validate.csv", prov,
              {"dynamics", "L", "c_sigma", "q0", "lipschitz", "activation", "contraction",
               "noise", "window"});
  const auto& r = res.report;
  w.row(spec.name, r.L, r.c_sigma, r.q0, r.lipschitz_ok, r.activation_ok, r.contraction_ok,
        r.noise_ok, r.window_ok);
  res.files = {w.path()};
  res.add("assumptions", r.passes(), r.summary());
  return res;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream* log) {
  switch (cfg.experiment) {
  case Experiment::Ergodicity:
    return run_ergodicity(cfg, log);
  case Experiment::Drift:
    return run_drift(cfg, log);
  case Experiment::GammaRates:
    return run_gamma_rates(cfg, log);
  case Experiment::Increment:
    return run_increment(cfg, log);
  case Experiment::Ntk:
    return run_ntk(cfg, log);
  case Experiment::Ode:
    return run_ode(cfg, log);
  case Experiment::Validate:
    return run_validate(cfg, log);
  }
  throw ConfigError("unknown experiment");
}

} // namespace mflab
