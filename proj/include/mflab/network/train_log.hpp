#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "mflab/network/network.hpp"

namespace mflab {

struct TrainRecord {
  std::uint64_t k;
  double y_hat;
  double y;
  double loss;
  double mean_feedback;
  double max_drift;
};

struct FunctionalSnapshot {
  std::uint64_t k;
  std::size_t test_function_id;
  double value;
};

struct TrainLog {
  std::size_t N = 0;
  std::vector<TrainRecord> records;
  std::vector<FunctionalSnapshot> functionals;
  std::vector<std::pair<std::uint64_t, ParamSet>> param_snapshots;
  ParamSet final_params;

  /// Columns k,t,y_hat,y,loss,mean_feedback,max_drift.
  void write_records_csv(std::ostream& os) const;
  /// Columns k,t,test_function_id,value.
  void write_functionals_csv(std::ostream& os) const;
};

/// Zero-residual mode replaces every target with the current prediction.
enum class TargetMode { FromData, MatchPrediction };

struct TrainOptions {
  TargetMode target = TargetMode::FromData;
  /// Assert the per-step increment bounds on every step (throws std::logic_error).
  bool check_bounds = false;
  bool keep_param_snapshots = false;
  std::vector<FuncH> test_functions;
  Activation act;
};

/// Snapshot spacing ceil(N / 50).
std::uint64_t snapshot_every(std::size_t n);

/// Steps performed for horizon T: floor(N T).
std::uint64_t horizon_steps(std::size_t n, double T);

/// Online training for floor(N T) steps; parameters seeded by cfg.seed, the
/// data path by data_seed.
TrainLog run_training(const ModelConfig& cfg, const DynamicsSpec& spec, double T,
                      std::uint64_t data_seed, const TrainOptions& opts = {});

} // namespace mflab
