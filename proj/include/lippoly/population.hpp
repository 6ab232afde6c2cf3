#pragma once

// Population game G' = g_G(L): every player i of G becomes L replicas, each
// playing G against the aggregate behaviour of the other populations.
// Replica l of population i has flat index i*L + l.

#include <memory>
#include <optional>
#include <string>

#include "lippoly/game.hpp"
#include "lippoly/purifier.hpp"
#include "lippoly/solver.hpp"

namespace lippoly {

enum class ViewMode { kLazy, kMaterialized };

ViewMode parse_view_mode(const std::string& s);
std::string view_mode_name(ViewMode mode);

inline constexpr double kDefaultMemoryBudget = 1e8;

// Coefficient-count budget for materialization: LIPPOLY_MEM_BUDGET if set,
// otherwise kDefaultMemoryBudget.
double population_memory_budget();

// (nL)^2 m^2, the number of coefficients a materialized G' would store.
double population_coefficient_count(int n, int m, int L);

class PopulationGame final : public GameView {
 public:
  // Prefer induce(); this constructor never materializes.
  PopulationGame(std::shared_ptr<const PolymatrixGame> base, int L);

  int num_players() const override { return base_->num_players() * L_; }
  int num_actions() const override { return base_->num_actions(); }
  // lambda / L.
  double lambda() const override { return base_->lambda() / L_; }
  double coefficient(Player v, Player vp, Action j, Action jp) const override;
  PayoffTable payoff_table(const MixedProfile& p) const override;

  const PolymatrixGame& base() const { return *base_; }
  int replication() const { return L_; }
  ViewMode mode() const { return dense_ ? ViewMode::kMaterialized : ViewMode::kLazy; }

  Player population_of(Player v) const { return v / L_; }
  Player replica(Player i, int l) const { return i * L_ + l; }

  // Row i is the mean of the rows of population i.
  MixedProfile population_aggregate(const MixedProfile& p) const;

  // Dense G'. Throws CapacityError when over `budget` coefficients.
  PolymatrixGame materialize(double budget) const;

  // Payoff table computed only through the base game, regardless of mode.
  PayoffTable lazy_payoff_table(const MixedProfile& p) const;

 private:
  friend PopulationGame induce(const PolymatrixGame&, int, ViewMode, std::optional<double>);

  std::shared_ptr<const PolymatrixGame> base_;
  int L_;
  std::shared_ptr<const PolymatrixGame> dense_;
};

// Materialized mode is refused with CapacityError above the budget
// (population_memory_budget() when not given).
PopulationGame induce(const PolymatrixGame& base, int L, ViewMode mode = ViewMode::kLazy,
                      std::optional<double> budget = std::nullopt);

// Empirical action distribution of each population: a 1/L-uniform profile of G.
MixedProfile aggregate(const PopulationGame& pop, const PureProfile& pure);

struct ReductionOptions {
  ViewMode view = ViewMode::kLazy;
  PurifyMode purify_mode = PurifyMode::kAuto;
  TraceLevel trace = TraceLevel::kOff;
  std::optional<SolverConfig> solver;  // default_solver_config(G') when unset
};

struct ReductionReport {
  int n = 0;
  int m = 0;
  int L = 0;
  int N = 0;
  std::string view;
  double base_lambda = 0.0;
  double population_lambda = 0.0;
  double epsilon = 0.0;
  double paper_L = 0.0;  // ceil(n^4 / eps^5)
  bool meets_paper_L = false;
  bool solver_converged = false;
  double solver_regret = 0.0;
  std::string solver_method;
  std::string purify_mode;
  double purified_regret = 0.0;  // max regret of the pure profile in G'
  double purify_bound = 0.0;
  double aggregated_regret = 0.0;          // max regret of the aggregate in G
  double aggregated_support_regret = 0.0;  // max support regret in G
  bool within_epsilon = false;             // aggregated_regret <= epsilon
};

struct ReductionResult {
  MixedProfile profile;  // 1/L-uniform profile of G
  PureProfile population_profile;
  ReductionReport report;
  PurifyResult purification;
};

ReductionResult reduce_and_solve(const PolymatrixGame& base, double epsilon, int L,
                                 const ReductionOptions& options = {});

}  // namespace lippoly
