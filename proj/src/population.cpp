#include "lippoly/population.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "lippoly/errors.hpp"
#include "lippoly/evaluation.hpp"

namespace lippoly {

ViewMode parse_view_mode(const std::string& s) {
  if (s == "lazy") return ViewMode::kLazy;
  if (s == "materialized") return ViewMode::kMaterialized;
  throw UsageError("unknown view mode '" + s + "' (lazy | materialized)");
}

std::string view_mode_name(ViewMode mode) {
  return mode == ViewMode::kLazy ? "lazy" : "materialized";
}

double population_memory_budget() {
  const char* env = std::getenv("LIPPOLY_MEM_BUDGET");
  if (env == nullptr || *env == '\0') return kDefaultMemoryBudget;
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(env, &end);
  if (errno != 0 || end == env || *end != '\0' || !(v > 0.0)) {
    throw UsageError(std::string("LIPPOLY_MEM_BUDGET must be a positive number, got '") + env + "'");
  }
  return v;
}

double population_coefficient_count(int n, int m, int L) {
  const double big_n = static_cast<double>(n) * L;
  return big_n * big_n * m * m;
}

PopulationGame::PopulationGame(std::shared_ptr<const PolymatrixGame> base, int L)
    : base_(std::move(base)), L_(L) {
  if (!base_) throw UsageError("population game needs a base game");
  if (L < 1) throw UsageError("replication L must be >= 1, got " + std::to_string(L));
}

double PopulationGame::coefficient(Player v, Player vp, Action j, Action jp) const {
  const int big_n = num_players();
  if (v < 0 || v >= big_n || vp < 0 || vp >= big_n) throw UsageError("replica index out of range");
  const Player i = population_of(v), ip = population_of(vp);
  if (i == ip) return 0.0;
  return base_->at(i, ip, j, jp) / L_;
}

MixedProfile PopulationGame::population_aggregate(const MixedProfile& p) const {
  const int n = base_->num_players();
  const int m = num_actions();
  p.validate(num_players(), m);
  MixedProfile agg(n, m);
  for (int i = 0; i < n; ++i) {
    for (int l = 0; l < L_; ++l) {
      for (int j = 0; j < m; ++j) agg(i, j) += p(replica(i, l), j);
    }
    for (int j = 0; j < m; ++j) agg(i, j) /= L_;
  }
  return agg;
}

PayoffTable PopulationGame::lazy_payoff_table(const MixedProfile& p) const {
  const int m = num_actions();
  const auto base_table = base_->payoff_table(population_aggregate(p));
  PayoffTable out(num_players(), m);
  for (int v = 0; v < num_players(); ++v) {
    const auto row = base_table.row(population_of(v));
    for (int j = 0; j < m; ++j) out(v, j) = row[j];
  }
  return out;
}

PayoffTable PopulationGame::payoff_table(const MixedProfile& p) const {
  if (dense_) return dense_->payoff_table(p);
  return lazy_payoff_table(p);
}

PolymatrixGame PopulationGame::materialize(double budget) const {
  const int n = base_->num_players();
  const int m = num_actions();
  const double count = population_coefficient_count(n, m, L_);
  if (count > budget) {
    std::ostringstream os;
    os << "materializing the population game needs " << count << " coefficients, budget is "
       << budget << "; use the lazy view";
    throw CapacityError(os.str(), count, budget);
  }
  PolymatrixGame g(num_players(), m, lambda());
  for (int i = 0; i < n; ++i) {
    for (int ip = 0; ip < n; ++ip) {
      if (ip == i) continue;
      const auto block = base_->block(i, ip);
      std::vector<double> scaled(block.begin(), block.end());
      for (double& x : scaled) x /= L_;
      for (int l = 0; l < L_; ++l) {
        for (int lp = 0; lp < L_; ++lp) g.set_block(replica(i, l), replica(ip, lp), scaled);
      }
    }
  }
  return g;
}

PopulationGame induce(const PolymatrixGame& base, int L, ViewMode mode, std::optional<double> budget) {
  PopulationGame pop(std::make_shared<const PolymatrixGame>(base), L);
  if (mode == ViewMode::kMaterialized) {
    pop.dense_ = std::make_shared<const PolymatrixGame>(
        pop.materialize(budget ? *budget : population_memory_budget()));
  }
  return pop;
}

MixedProfile aggregate(const PopulationGame& pop, const PureProfile& pure) {
  if (pure.size() != pop.num_players()) {
    throw UsageError("population profile has " + std::to_string(pure.size()) +
                     " entries, expected " + std::to_string(pop.num_players()));
  }
  pure.validate(pop.num_players(), pop.num_actions());
  const int n = pop.base().num_players();
  const int m = pop.num_actions();
  const int L = pop.replication();
  MixedProfile out(n, m);
  for (int i = 0; i < n; ++i) {
    std::vector<int> counts(static_cast<std::size_t>(m), 0);
    for (int l = 0; l < L; ++l) ++counts[pure[pop.replica(i, l)]];
    for (int j = 0; j < m; ++j) out(i, j) = static_cast<double>(counts[j]) / L;
  }
  return out;
}

ReductionResult reduce_and_solve(const PolymatrixGame& base, double epsilon, int L,
                                 const ReductionOptions& options) {
  if (!(epsilon > 0.0)) throw UsageError("epsilon must be positive");
  const auto pop = induce(base, L, options.view);

  ReductionResult out;
  auto& rep = out.report;
  rep.n = base.num_players();
  rep.m = base.num_actions();
  rep.L = L;
  rep.N = pop.num_players();
  rep.view = view_mode_name(options.view);
  rep.base_lambda = base.lambda();
  rep.population_lambda = pop.lambda();
  rep.epsilon = epsilon;
  rep.paper_L = std::ceil(std::pow(rep.n, 4) / std::pow(epsilon, 5));
  rep.meets_paper_L = static_cast<double>(L) >= rep.paper_L;

  const SolverConfig cfg = options.solver ? *options.solver : default_solver_config(pop);
  const auto solved = solve_mixed(pop, cfg);
  rep.solver_converged = solved.converged;
  rep.solver_regret = solved.achieved_max_regret;
  rep.solver_method = solved.method;

  PurifyOptions popts;
  popts.trace = options.trace;
  out.purification = purify(pop, solved.profile, options.purify_mode, popts);
  rep.purify_mode = purify_mode_name(out.purification.mode);
  rep.purified_regret = out.purification.final_max_regret;
  rep.purify_bound = out.purification.regret_bound;
  out.population_profile = out.purification.profile;

  out.profile = aggregate(pop, out.population_profile);
  rep.aggregated_regret = regret_report(base, out.profile).max_regret;
  rep.aggregated_support_regret = max_support_regret(base, out.profile);
  rep.within_epsilon = rep.aggregated_regret <= epsilon;
  return out;
}

}  // namespace lippoly
