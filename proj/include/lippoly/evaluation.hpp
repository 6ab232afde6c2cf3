#pragma once

#include <span>
#include <vector>

#include "lippoly/game.hpp"

namespace lippoly {

struct RegretReport {
  std::vector<double> per_player_regret;
  double max_regret = 0.0;
  Player argmax_player = 0;
};

// Sum over opponents of beta[i][ip][j][others[ip]]; others[i] is ignored.
double pure_payoff(const GameView& game, Player i, Action j, const PureProfile& others);
// u_i(a) for the action i actually plays in a.
double pure_payoff(const GameView& game, Player i, const PureProfile& a);

// Expected payoff of action j against the opponents' rows of `others`.
// O(nm); row i of `others` is ignored but the whole profile is validated.
double mixed_payoff(const GameView& game, Player i, Action j, const MixedProfile& others);

// u_i(j, p_-i) for every action j.
std::vector<double> payoff_vector(const GameView& game, Player i, const MixedProfile& p);

double regret(const GameView& game, Player i, const MixedProfile& p);
double regret(const GameView& game, Player i, const PureProfile& a);

// u_i(2, p_-i) - u_i(1, p_-i). Binary games only.
double discrepancy(const GameView& game, Player i, const MixedProfile& p);

// Lowest-index argmax of the payoff vector.
Action best_response(const GameView& game, Player i, const MixedProfile& p);
Action best_response(std::span<const double> payoffs);

RegretReport regret_report(const GameView& game, const MixedProfile& p);
RegretReport regret_report(const GameView& game, const PureProfile& a);
// From an already computed payoff table.
RegretReport regret_report(const PayoffTable& table, const MixedProfile& p);

// Largest regret of any action in any player's support (entries > support_tol).
// A profile is an eps-WSNE iff this is <= eps.
double max_support_regret(const PayoffTable& table, const MixedProfile& p,
                          double support_tol = 0.0);
double max_support_regret(const GameView& game, const MixedProfile& p,
                          double support_tol = 0.0);

double tv_distance(std::span<const double> a, std::span<const double> b);

}  // namespace lippoly
