#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mflab/harness/experiments.hpp"
#include "mflab/simd/kernels.hpp"

namespace {

struct Overrides {
  std::string config;
  std::vector<std::size_t> n_grid;
  std::size_t seeds = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  std::size_t jobs = 0;
  bool allow = false;
  double L = -1.0;
};

mflab::ExperimentConfig build_config(mflab::Experiment e, const Overrides& o) {
  auto cfg = mflab::ExperimentConfig::defaults(e);
  if (!o.config.empty()) {
    mflab::apply_json(cfg, mflab::load_config_file(o.config));
  }
  if (!o.n_grid.empty()) {
    cfg.N_grid = o.n_grid;
  }
  if (o.seeds > 0) {
    cfg.seeds = o.seeds;
  }
  if (o.seed_set) {
    cfg.seed = o.seed;
  }
  if (!o.out.empty()) {
    cfg.out_dir = o.out;
  }
  if (o.jobs > 0) {
    cfg.jobs = o.jobs;
  }
  if (o.allow) {
    cfg.allow_assumption_violation = true;
  }
  if (o.L >= 0.0) {
    cfg.L = o.L;
  }
  return cfg;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"mflab: mean-field and NTK numerics for recurrent networks"};
  app.require_subcommand(1);
  std::string simd = "auto";
  app.add_option("--simd", simd, "kernel backend: auto, scalar or avx2")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}));

  Overrides o;
  const std::vector<std::pair<mflab::Experiment, const char*>> commands = {
      {mflab::Experiment::Ergodicity, "hidden-unit ergodicity and mean-field convergence"},
      {mflab::Experiment::Drift, "parameter drift envelope"},
      {mflab::Experiment::GammaRates, "memory process error rates"},
      {mflab::Experiment::Increment, "first-order increment consistency"},
      {mflab::Experiment::Ntk, "convergence to the kernel limit"},
      {mflab::Experiment::Ode, "limit ODE, oracle agreement and loss descent"},
      {mflab::Experiment::Validate, "check the data and activation assumptions"},
  };
  std::vector<std::pair<CLI::App*, mflab::Experiment>> subs;
  for (const auto& [e, help] : commands) {
    auto* sub = app.add_subcommand(mflab::experiment_name(e), help);
    sub->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--N-grid", o.n_grid, "widths, e.g. --N-grid 100,1000")->delimiter(',');
    sub->add_option("--seeds", o.seeds, "number of seeds");
    sub->add_option_function<std::uint64_t>(
        "--seed", [&o](std::uint64_t v) { o.seed = v; o.seed_set = true; }, "base seed");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--jobs", o.jobs, "worker threads");
    sub->add_flag("--allow-assumption-violation", o.allow,
                  "run even when the data/activation assumptions fail");
    sub->add_option("--L", o.L, "override the Lipschitz bound of the dynamics");
    subs.emplace_back(sub, e);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (simd == "scalar") {
      mflab::simd::set_backend(mflab::simd::Backend::Scalar);
    } else if (simd == "avx2") {
      mflab::simd::set_backend(mflab::simd::Backend::Avx2);
    }
    for (const auto& [sub, e] : subs) {
      if (!sub->parsed()) {
        continue;
      }
      const auto cfg = build_config(e, o);
      const auto res = mflab::run_experiment(cfg, &std::cerr);
      for (const auto& c : res.checks) {
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
      }
      for (const auto& f : res.files) {
        std::cout << "wrote " << f.string() << '\n';
      }
      return res.passed() ? 0 : 1;
    }
  } catch (const mflab::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
