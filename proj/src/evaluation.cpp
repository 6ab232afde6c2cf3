#include "lippoly/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lippoly/errors.hpp"
#include "lippoly/kernels.hpp"

namespace lippoly {

namespace {

void check_player(const GameView& game, Player i) {
  if (i < 0 || i >= game.num_players()) {
    throw UsageError("player " + std::to_string(i) + " out of range");
  }
}

void check_action(const GameView& game, Action j) {
  if (j < 0 || j >= game.num_actions()) {
    throw UsageError("action " + std::to_string(j) + " out of range");
  }
}

// A convex combination never beats the max, so anything negative is rounding.
double clamp_regret(double r) { return r < 0.0 ? 0.0 : r; }

}  // namespace

double pure_payoff(const GameView& game, Player i, Action j, const PureProfile& others) {
  check_player(game, i);
  check_action(game, j);
  if (others.size() != game.num_players()) {
    throw UsageError("profile has " + std::to_string(others.size()) + " entries, expected " +
                     std::to_string(game.num_players()));
  }
  double total = 0.0;
  for (int ip = 0; ip < game.num_players(); ++ip) {
    if (ip == i) continue;
    const Action jp = others[ip];
    if (jp < 0 || jp >= game.num_actions()) {
      throw UsageError("player " + std::to_string(ip) + " action out of range");
    }
    total += game.coefficient(i, ip, j, jp);
  }
  return total;
}

double pure_payoff(const GameView& game, Player i, const PureProfile& a) {
  check_player(game, i);
  return pure_payoff(game, i, a[i], a);
}

double mixed_payoff(const GameView& game, Player i, Action j, const MixedProfile& others) {
  check_player(game, i);
  check_action(game, j);
  others.validate(game.num_players(), game.num_actions());
  double total = 0.0;
  for (int ip = 0; ip < game.num_players(); ++ip) {
    if (ip == i) continue;
    double acc = 0.0;
    for (int jp = 0; jp < game.num_actions(); ++jp) {
      acc += game.coefficient(i, ip, j, jp) * others(ip, jp);
    }
    total += acc;
  }
  return total;
}

std::vector<double> payoff_vector(const GameView& game, Player i, const MixedProfile& p) {
  check_player(game, i);
  p.validate(game.num_players(), game.num_actions());
  std::vector<double> u(static_cast<std::size_t>(game.num_actions()), 0.0);
  for (int ip = 0; ip < game.num_players(); ++ip) {
    if (ip == i) continue;
    for (int j = 0; j < game.num_actions(); ++j) {
      double acc = 0.0;
      for (int jp = 0; jp < game.num_actions(); ++jp) {
        acc += game.coefficient(i, ip, j, jp) * p(ip, jp);
      }
      u[j] += acc;
    }
  }
  return u;
}

Action best_response(std::span<const double> payoffs) {
  Action best = 0;
  for (std::size_t j = 1; j < payoffs.size(); ++j) {
    if (payoffs[j] > payoffs[static_cast<std::size_t>(best)]) best = static_cast<Action>(j);
  }
  return best;
}

Action best_response(const GameView& game, Player i, const MixedProfile& p) {
  return best_response(payoff_vector(game, i, p));
}

double regret(const GameView& game, Player i, const MixedProfile& p) {
  const auto u = payoff_vector(game, i, p);
  double played = 0.0;
  for (int j = 0; j < game.num_actions(); ++j) played += p(i, j) * u[j];
  return clamp_regret(*std::max_element(u.begin(), u.end()) - played);
}

double regret(const GameView& game, Player i, const PureProfile& a) {
  a.validate(game.num_players(), game.num_actions());
  return regret(game, i, MixedProfile::from_pure(a, game.num_actions()));
}

double discrepancy(const GameView& game, Player i, const MixedProfile& p) {
  if (game.num_actions() != 2) {
    throw UnsupportedOperation("discrepancy is defined for binary-action games only");
  }
  return mixed_payoff(game, i, 1, p) - mixed_payoff(game, i, 0, p);
}

RegretReport regret_report(const PayoffTable& table, const MixedProfile& p) {
  RegretReport report;
  report.per_player_regret = kernels::regrets_parallel(table, p);
  for (int i = 0; i < table.num_players(); ++i) {
    if (report.per_player_regret[i] > report.max_regret) {
      report.max_regret = report.per_player_regret[i];
      report.argmax_player = i;
    }
  }
  return report;
}

RegretReport regret_report(const GameView& game, const MixedProfile& p) {
  p.validate(game.num_players(), game.num_actions());
  return regret_report(game.payoff_table(p), p);
}

RegretReport regret_report(const GameView& game, const PureProfile& a) {
  a.validate(game.num_players(), game.num_actions());
  return regret_report(game, MixedProfile::from_pure(a, game.num_actions()));
}

double max_support_regret(const PayoffTable& table, const MixedProfile& p,
                          double support_tol) {
  double worst = 0.0;
  for (int i = 0; i < table.num_players(); ++i) {
    const auto u = table.row(i);
    const double best = *std::max_element(u.begin(), u.end());
    for (int j = 0; j < table.num_actions(); ++j) {
      if (p(i, j) > support_tol) worst = std::max(worst, best - u[j]);
    }
  }
  return worst;
}

double max_support_regret(const GameView& game, const MixedProfile& p, double support_tol) {
  p.validate(game.num_players(), game.num_actions());
  return max_support_regret(game.payoff_table(p), p, support_tol);
}

double tv_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw UsageError("distributions differ in length");
  double total = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) total += std::abs(a[j] - b[j]);
  return 0.5 * total;
}

}  // namespace lippoly
