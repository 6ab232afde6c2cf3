#pragma once

// Deterministic mixed-to-pure rounding for Lipschitz polymatrix games.
//
// Binary path (m = 2):
//   1. lambda/8-ANE -> lambda*sqrt(n)-WSNE by switching every player whose
//      discrepancy is large to their best response.
//   2. Round players one at a time so the quadratic cost C (sum of squared
//      discrepancies over the relevant players) grows only through its
//      second-order term.
//   3. Switch every player with regret >= delta = lambda*(20n^2)^(1/3).
//
// m-action path: the same three stages with the variance of each player's
// relevant action set as the potential.
//
// Every bound the analysis relies on is evaluated at runtime and recorded as
// a BoundCheck. A failing hard check throws InvariantBreach.

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lippoly/errors.hpp"
#include "lippoly/game.hpp"

namespace lippoly {

enum class TraceLevel { kFull, kPotentials, kOff };
enum class PurifyMode { kBinary, kMAction, kAuto };

TraceLevel parse_trace_level(const std::string& s);
std::string trace_level_name(TraceLevel level);
PurifyMode parse_purify_mode(const std::string& s);
std::string purify_mode_name(PurifyMode mode);

struct PurifyOptions {
  // Player processing order for all three stages. Empty means 0..n-1.
  std::vector<Player> order;
  TraceLevel trace = TraceLevel::kFull;
};

// Result of the first stage of either path.
struct WsneStep {
  MixedProfile profile;
  std::vector<Player> switched;  // players whose row was changed
  double input_max_regret = 0.0;
  double required_regret = 0.0;  // epsilon_0 of the path
  // Input regret was above epsilon_0 but within twice that.
  bool precondition_relaxed = false;
  double support_regret = 0.0;  // max support regret of `profile`
  double support_bound = 0.0;
};

// ---- binary path ----------------------------------------------------------

struct BinaryStep {
  int step = 0;  // 1-based position in the scan
  Player player = 0;
  bool was_mixed = false;
  double p_before = 0.0;  // probability on action index 1
  double p_after = 0.0;
  double coefficient = 0.0;  // A; 0 when the player was already pure
  double cost = 0.0;         // C(p^(t)) over S^(t)
  double cost_increase = 0.0;
  double cost_increase_bound = 0.0;
  std::vector<Player> new_members;
};

struct BinaryPurifyTrace {
  TraceLevel level = TraceLevel::kFull;
  int n = 0;
  double lambda = 0.0;
  double epsilon0 = 0.0;      // lambda / 8
  double wsne_bound = 0.0;    // lambda * sqrt(n)
  double cost_bound = 0.0;    // 5 lambda^2 n^2
  double delta = 0.0;         // lambda * (20 n^2)^(1/3)
  double regret_bound = 0.0;  // lambda * (70 n^2)^(1/3)

  std::vector<Player> order;
  double input_max_regret = 0.0;
  bool precondition_relaxed = false;
  std::vector<Player> step1_switched;
  double wsne_support_regret = 0.0;

  // Full level only.
  MixedProfile input_profile;
  MixedProfile wsne_profile;
  std::vector<MixedProfile> step_profiles;          // p^(0) .. p^(n)
  std::vector<std::vector<Player>> relevant_sets;   // S^(0) .. S^(n)

  // Potentials level and above.
  std::vector<double> cost;  // C(p^(t)) over S^(t), t = 0..n
  std::vector<BinaryStep> steps;

  double terminal_cost = 0.0;
  int terminal_relevant_size = 0;
  PureProfile rounded_profile;
  std::vector<Player> switched_players;  // Step 3
  PureProfile final_profile;
  double final_max_regret = 0.0;

  std::vector<std::string> warnings;
  std::vector<BoundCheck> checks;
};

MixedProfile ane_to_wsne_binary(const GameView& game, const MixedProfile& profile,
                                const PurifyOptions& options = {});
WsneStep ane_to_wsne_binary_step(const GameView& game, const MixedProfile& profile,
                                 const PurifyOptions& options = {});

struct BinaryRounding {
  PureProfile profile;
  BinaryPurifyTrace trace;
};
BinaryRounding purify_rounding_binary(const GameView& game, const MixedProfile& wsne,
                                      const PurifyOptions& options = {});

// Step 3. Appends its checks and the final profile to `trace`.
PureProfile correct_binary(const GameView& game, const PureProfile& pure,
                           BinaryPurifyTrace& trace);

// ---- m-action path --------------------------------------------------------

// Relevant set of one player at one point of the scan.
struct RelevantSnapshot {
  std::vector<Action> actions;   // ascending
  std::vector<double> payoffs;   // u_i(S, t), aligned with actions
  double mean = 0.0;
  double variance = 0.0;
};

struct MActionStep {
  int step = 0;
  Player player = 0;
  bool was_pure = false;
  Action chosen = 0;
  std::vector<double> b;  // aggregate linear coefficients, one per action
  double linear_term = 0.0;  // b . (p_new - p_old)
  double variance_before = 0.0;      // sum_i sigma_i^2(S^(t-1), t-1)
  double variance_after_move = 0.0;  // sum_i sigma_i^2(S^(t-1), t)
  double variance_after = 0.0;       // sum_i sigma_i^2(S^(t), t)
  int additions = 0;
};

struct MActionPurifyTrace {
  TraceLevel level = TraceLevel::kFull;
  int n = 0;
  int m = 0;
  double lambda = 0.0;
  double epsilon0 = 0.0;
  double epsilon1 = 0.0;
  double delta0 = 0.0;
  double delta1 = 0.0;
  double initial_budget = 0.0;   // 2 (n lambda (m-1)/m)^2
  double growth_budget = 0.0;    // 4 n lambda^2 (log(m-1) + 1)
  double step_budget = 0.0;      // ((m-1)/m n lambda)^2
  double terminal_bound = 0.0;   // 8 n^2 lambda^2 log(3m)
  double switch_bound = 0.0;     // 16 n^2 lambda^2 m log(3m) / delta1^2
  double regret_bound = 0.0;     // 6 lambda (n^2 m log 3m)^(1/3)

  std::vector<Player> order;
  double input_max_regret = 0.0;
  bool precondition_relaxed = false;
  std::vector<Player> step1_switched;
  double wsne_support_regret = 0.0;

  // Full level only.
  MixedProfile input_profile;
  MixedProfile wsne_profile;
  std::vector<MixedProfile> step_profiles;                 // t = 0..n
  std::vector<std::vector<RelevantSnapshot>> snapshots;    // [t][player]

  // Potentials level and above.
  std::vector<std::vector<int>> relevant_sizes;  // [t][player]
  std::vector<double> variance;                  // sum of variances, t = 0..n
  std::vector<MActionStep> steps;

  double initial_variance = 0.0;
  double growth_total = 0.0;
  double step_total = 0.0;
  double terminal_variance = 0.0;
  PureProfile rounded_profile;
  std::vector<Player> switched_players;
  PureProfile final_profile;
  double final_max_regret = 0.0;

  std::vector<std::string> warnings;
  std::vector<BoundCheck> checks;
};

MixedProfile ane_to_wsne_m(const GameView& game, const MixedProfile& profile,
                           const PurifyOptions& options = {});
WsneStep ane_to_wsne_m_step(const GameView& game, const MixedProfile& profile,
                            const PurifyOptions& options = {});

struct MActionRounding {
  PureProfile profile;
  MActionPurifyTrace trace;
};
MActionRounding purify_rounding_m(const GameView& game, const MixedProfile& wsne,
                                  const PurifyOptions& options = {});

PureProfile correct_m(const GameView& game, const PureProfile& pure, MActionPurifyTrace& trace);

// ---- thresholds -----------------------------------------------------------

struct BinaryThresholds {
  double epsilon0, wsne_bound, step1_threshold, cost_bound, delta, regret_bound;
};
BinaryThresholds binary_thresholds(int n, double lambda);

struct MActionThresholds {
  double epsilon0, delta0, epsilon1, delta1, initial_budget, growth_budget, step_budget,
      terminal_bound, switch_bound, regret_bound;
};
MActionThresholds m_action_thresholds(int n, int m, double lambda);

// One step of the relevant-set recurrence.
struct SetAddition {
  Action action = 0;
  int size_before = 0;
  double mean_before = 0.0;
  double variance_before = 0.0;
  double payoff = 0.0;
  double variance_after = 0.0;
};

// Repeatedly add the highest-paying action outside `set` (lowest index on
// ties) while it pays at least the mean over `set`. `set` stays sorted.
std::vector<SetAddition> grow_relevant_set(std::vector<Action>& set,
                                           std::span<const double> payoffs);

// Change in population variance when x joins k points with mean mu and
// variance sigma2.
double variance_addition_delta(int k, double mu, double sigma2, double x);

// ---- dispatcher -----------------------------------------------------------

struct PurifyResult {
  PureProfile profile;
  PurifyMode mode = PurifyMode::kBinary;  // path actually taken
  std::variant<BinaryPurifyTrace, MActionPurifyTrace> trace;
  double final_max_regret = 0.0;
  double regret_bound = 0.0;
};

// auto picks the binary path iff m = 2.
PurifyResult purify(const GameView& game, const MixedProfile& profile, PurifyMode mode,
                    const PurifyOptions& options = {});

const std::vector<BoundCheck>& trace_checks(const PurifyResult& result);

}  // namespace lippoly
