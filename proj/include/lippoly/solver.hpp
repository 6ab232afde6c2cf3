#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "lippoly/game.hpp"

namespace lippoly {

enum class StepSchedule { kFixed, kHarmonic };

struct SolverConfig {
  // Target max regret (epsilon_0 of the purifier that consumes the result).
  double target_epsilon = 0.0;
  // Fictitious-play iterations.
  int max_iterations = 200;
  StepSchedule step_schedule = StepSchedule::kHarmonic;
  double fixed_step = 0.05;
  // Logit temperature of the smoothed response; 0 selects target_epsilon / 4.
  double smoothing = 0.0;
  // 0 starts fictitious play from the uniform profile, anything else from a
  // seeded random interior profile.
  std::uint64_t seed = 0;
  // When set, solve_mixed runs brute_force_kuniform with this k instead.
  std::optional<int> uniform_grid_k;
  // Fall back to logit-response continuation when the dynamics stall.
  bool refine = true;
  int max_newton_steps = 4000;

  void validate() const;
};

struct SolveResult {
  MixedProfile profile;
  double achieved_max_regret = 0.0;
  int iterations_used = 0;
  bool converged = false;
  std::string method;  // "fictitious_play", "logit_continuation" or "grid"
};

// lambda / 8 for binary games, ((m-1)/m)^2 lambda otherwise.
double default_target_epsilon(const GameView& game);
SolverConfig default_solver_config(const GameView& game);

// Best-effort mixed approximate equilibrium. Returns the lowest max-regret
// profile visited; converged iff that regret is <= target_epsilon.
// Deterministic for a fixed (game, config).
SolveResult solve_mixed(const GameView& game, const SolverConfig& config);

// Refuse grids with more than this many profiles.
inline constexpr double kGridProfileLimit = 1e7;

// Exact minimiser of max regret over profiles whose probabilities are
// multiples of 1/k. Throws CapacityError when the grid is too large.
// `converged` is always true here: the minimum is exact.
SolveResult brute_force_kuniform(const PolymatrixGame& game, int k);

// Number of profiles brute_force_kuniform would scan.
double kuniform_grid_size(int n, int m, int k);

}  // namespace lippoly
