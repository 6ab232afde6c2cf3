#pragma once

// Experiment orchestration: sampling baseline, check -> solve -> purify
// pipeline, ensemble reports.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lippoly/generator.hpp"
#include "lippoly/io.hpp"

namespace lippoly {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,  // usage, I/O or validation failure
  kExitWitness = 10,
  kExitNotConverged = 20,
  kExitBreach = 30,
};

// Single-coefficient Lipschitz fault: beta[i][ip][j][jp] is raised by 2 lambda.
struct PlantedFault {
  Player player = 0;
  Player opponent = 0;
  Action action = 0;
  Action opponent_action = 0;
  double original = 0.0;
  double planted = 0.0;
};
PlantedFault plant_lipschitz_fault(PolymatrixGame& game, std::uint64_t seed);

// lambda * sqrt(8 n log(2 m n)).
double existence_threshold(int n, int m, double lambda);

struct BaselineReport {
  int trials = 0;
  std::uint64_t seed = 0;
  double threshold = 0.0;
  double input_max_regret = 0.0;
  std::vector<double> regrets;  // per trial, in trial order
  double min = 0.0;
  double median = 0.0;
  double mean = 0.0;
  double max = 0.0;
  double fraction_within_threshold = 0.0;
};

// Draws `trials` independent pure realizations of `mixed`. Trial t uses its
// own generator seeded from (seed, t), so results do not depend on the
// thread count.
BaselineReport sample_baseline(const GameView& game, const MixedProfile& mixed, int trials,
                               std::uint64_t seed);
Json baseline_to_json(const BaselineReport& r, bool include_regrets = false);

struct ReduceStage {
  double epsilon = 0.1;
  int L = 10;
  ViewMode view = ViewMode::kLazy;
};

struct PipelineOptions {
  PurifyMode mode = PurifyMode::kAuto;
  TraceLevel trace = TraceLevel::kOff;
  std::optional<SolverConfig> solver;  // default_solver_config when unset
  // Sidecar keys applied over each game's default config; used when `solver`
  // is unset.
  Json solver_overrides;
  std::optional<ReduceStage> reduce;
  int baseline_trials = 0;
  std::uint64_t seed = 0;  // baseline seed
};

struct PipelineRecord {
  std::string label;
  std::string digest;
  int n = 0;
  int m = 0;
  double lambda = 0.0;
  std::string status;  // ok | witness | range_violation | not_converged | precondition | breach
  int exit_code = kExitOk;
  Json record;
};

// Never throws for game-level outcomes; they are folded into the record.
PipelineRecord run_pipeline(const PolymatrixGame& game, const PipelineOptions& options,
                            const std::string& label = "");

// Highest-priority code over all records: 1 > 10 > 30 > 20 > 0.
int combine_exit_codes(const std::vector<PipelineRecord>& records);

// Counts by status and quantiles of final regret and regret / bound.
Json aggregate_records(const std::vector<PipelineRecord>& records);

// One CSV row per record: label, digest, n, m, lambda, status, regrets, bounds.
std::string records_to_csv(const std::vector<PipelineRecord>& records);

// min, p50, p90, max and mean of xs (linear interpolation between ranks).
Json quantiles(std::vector<double> xs);

// Generated ensemble: instance k uses seed base.seed + k.
std::vector<PipelineRecord> run_ensemble(const GeneratorSpec& base, int count,
                                         const PipelineOptions& options);

}  // namespace lippoly
