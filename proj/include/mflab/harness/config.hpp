#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mflab/core/activation.hpp"
#include "mflab/dynamics/dynamics.hpp"
#include "mflab/limit_ode/limit_ode.hpp"
#include "mflab/network/network.hpp"

namespace mflab {

enum class Experiment { Ergodicity, Drift, GammaRates, Increment, Ntk, Ode, Validate };

std::string experiment_name(Experiment e);
/// Throws ConfigError for an unknown name.
Experiment parse_experiment(const std::string& name);

struct ExperimentConfig {
  Experiment experiment = Experiment::Validate;
  std::vector<std::size_t> N_grid;
  std::size_t paths = 20;
  std::uint64_t steps = 5000; // ergodicity horizon k
  double T = 1.0;             // training horizon, steps = floor(N T)
  std::uint64_t seed = 1;
  std::size_t seeds = 1;

  // model
  double beta = 0.75;
  double gamma = 0.1;
  double alpha = 1.0;
  CUpdateIndex c_index = CUpdateIndex::Own;
  BUpdateForm b_form = BUpdateForm::Gradient;
  double activation_scale = 1.0; // 1 selects the standard logistic

  // dynamics
  std::string dynamics = "rotation-tanh";
  double output_scale = 0.25;
  double eta_halfwidth = 0.05;
  double eps_halfwidth = 0.25;
  std::optional<double> L;

  // mean-field and limit
  std::size_t lambda_samples = 100000;
  std::size_t M = 256;
  std::uint64_t burn_in = 250;
  std::uint64_t stride = 10;
  double burn_in_tol = 1e-6;
  Harvest harvest = Harvest::SingleChain;
  double ode_T = 10.0;
  double dt = 0.01;
  std::size_t oracle_M = 32;
  bool zero_targets = false;

  // experiment specific
  bool shared_theta = false;    // ergodicity: one parameter draw for all paths
  std::size_t init_seeds = 500; // ntk: seeds for the initialization RMS fit

  std::size_t jobs = 1;
  bool allow_assumption_violation = false;
  std::string out_dir = "out";

  /// Defaults of the named experiment.
  static ExperimentConfig defaults(Experiment e);

  ModelConfig model(std::size_t N, std::uint64_t seed) const;
  Activation activation() const;
  DynamicsSpec dynamics_spec() const;

  nlohmann::json to_json() const;
  /// FNV-1a over the canonical JSON dump, excluding jobs and out_dir.
  std::uint64_t hash() const;
  std::string hash_hex() const;
};

/// Applies the keys of `j` on top of `cfg`. Unknown keys and ill-typed values
/// raise ConfigError.
void apply_json(ExperimentConfig& cfg, const nlohmann::json& j);

/// Reads a JSON file; ConfigError when it cannot be opened or parsed.
nlohmann::json load_config_file(const std::string& path);

struct ValidationOutcome {
  AssumptionReport report;
  bool overridden = false; // assumptions fail but the run is allowed
};

/// Checks the (beta, gamma) window, the grid and the data/activation
/// assumptions. Throws ConfigError on failure unless
/// allow_assumption_violation is set, in which case the failure is reported
/// as overridden.
ValidationOutcome validate_config(const ExperimentConfig& cfg);

} // namespace mflab
