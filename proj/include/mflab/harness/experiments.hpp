#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mflab/core/rate_fit.hpp"
#include "mflab/harness/config.hpp"

namespace mflab {

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ExperimentResult {
  std::string command;
  std::vector<Check> checks;
  std::vector<std::filesystem::path> files;

  bool passed() const;
  void add(std::string name, bool pass, std::string detail);
};

struct ErgodicityResult : ExperimentResult {
  std::vector<std::size_t> N;
  std::vector<std::uint64_t> schedule; // ascending horizons T
  /// overall[n][p-1][s]: path-averaged time average at schedule[s].
  std::vector<std::vector<std::vector<double>>> overall;
  /// band[n][p-1]: max - min over paths at the final horizon.
  std::vector<std::vector<double>> band;
  /// w1[n] = W1(nu^{N[n]}, nu^{N[n+1]}) of the pooled final-step values.
  std::vector<double> w1;
};

struct DriftResult : ExperimentResult {
  std::vector<std::size_t> N;
  std::vector<double> mean_max_drift;
  RateFit fit{};
};

struct GammaRatesResult : ExperimentResult {
  std::vector<std::size_t> N;
  std::vector<double> mean_e1_sq;
  std::vector<double> mean_e2_sq;
  RateFit fit_e1{};
  RateFit fit_e2{};
};

struct IncrementResult : ExperimentResult {
  std::vector<std::size_t> N;
  std::vector<double> mean_max_err; // seeds-mean of max over k and test functions
  double slope = 0.0;
};

struct NtkResult : ExperimentResult {
  std::vector<std::size_t> N;
  std::vector<double> mean_sup_err;
  std::vector<double> init_rms;
  RateFit init_fit{};
};

struct OdeResult : ExperimentResult {
  double min_eig = 0.0;
  double trace = 0.0;
  bool monotone = false;
  double oracle_err = 0.0;      // RK4 vs closed form on the oracle sub-sample
  double full_oracle_err = 0.0; // same at full M
  double loss0 = 0.0;
  double lossT = 0.0;
};

struct ValidateResult : ExperimentResult {
  AssumptionReport report;
};

/// Each runner validates `cfg`, writes its CSVs under cfg.out_dir and returns
/// the verdicts. ConfigError propagates. `log` receives progress lines.
ErgodicityResult run_ergodicity(const ExperimentConfig& cfg, std::ostream* log = nullptr);
DriftResult run_drift(const ExperimentConfig& cfg, std::ostream* log = nullptr);
GammaRatesResult run_gamma_rates(const ExperimentConfig& cfg, std::ostream* log = nullptr);
IncrementResult run_increment(const ExperimentConfig& cfg, std::ostream* log = nullptr);
NtkResult run_ntk(const ExperimentConfig& cfg, std::ostream* log = nullptr);
OdeResult run_ode(const ExperimentConfig& cfg, std::ostream* log = nullptr);
/// Reports the assumption checks; does not throw on failing assumptions.
ValidateResult run_validate(const ExperimentConfig& cfg, std::ostream* log = nullptr);

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream* log = nullptr);

/// T, T/2, T/4, ... down to 1, returned ascending.
std::vector<std::uint64_t> halving_schedule(std::uint64_t steps);

} // namespace mflab
