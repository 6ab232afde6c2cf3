#include "lippoly/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lippoly/errors.hpp"
#include "lippoly/evaluation.hpp"

namespace lippoly {

namespace {

struct GapLocation {
  double gap = -1.0;
  Player i = 0, ip = 0;
  Action j = 0, jp1 = 0, jp2 = 0;
};

GapLocation largest_gap(const GameView& game) {
  const int n = game.num_players();
  const int m = game.num_actions();
  GapLocation best;
  for (int i = 0; i < n; ++i) {
    for (int ip = 0; ip < n; ++ip) {
      if (ip == i) continue;
      for (int j = 0; j < m; ++j) {
        for (int jp1 = 0; jp1 < m; ++jp1) {
          for (int jp2 = jp1 + 1; jp2 < m; ++jp2) {
            const double gap = std::abs(game.coefficient(i, ip, j, jp1) -
                                        game.coefficient(i, ip, j, jp2));
            if (gap > best.gap) best = {gap, i, ip, j, jp1, jp2};
          }
        }
      }
    }
  }
  return best;
}

LipschitzWitness synthesize_witness(const GameView& game, const GapLocation& at) {
  LipschitzWitness w;
  w.player = at.i;
  w.profile_a = PureProfile(game.num_players(), 0);
  w.profile_a[at.i] = at.j;
  w.profile_b = w.profile_a;
  w.profile_a[at.ip] = at.jp1;
  w.profile_b[at.ip] = at.jp2;
  w.observed_gap = std::abs(pure_payoff(game, at.i, w.profile_a) -
                            pure_payoff(game, at.i, w.profile_b));
  w.allowed_gap =
      game.lambda() * hamming_distance_excluding(w.profile_a, w.profile_b, at.i);
  return w;
}

}  // namespace

double max_coefficient_gap(const GameView& game) {
  return std::max(0.0, largest_gap(game).gap);
}

CheckResult check_game(const GameView& game) {
  if (game.num_players() >= 2) {
    const GapLocation at = largest_gap(game);
    if (at.gap > game.lambda() + kTolerance) return synthesize_witness(game, at);
  }

  const int n = game.num_players();
  const int m = game.num_actions();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      double sum_max = 0.0;
      double sum_min = 0.0;
      for (int ip = 0; ip < n; ++ip) {
        if (ip == i) continue;
        double hi = -std::numeric_limits<double>::infinity();
        double lo = std::numeric_limits<double>::infinity();
        for (int jp = 0; jp < m; ++jp) {
          hi = std::max(hi, game.coefficient(i, ip, j, jp));
          lo = std::min(lo, game.coefficient(i, ip, j, jp));
        }
        sum_max += hi;
        sum_min += lo;
      }
      if (sum_max > 1.0 + kTolerance) {
        return RangeViolation{i, j, RangeDirection::kAboveOne, sum_max};
      }
      if (sum_min < -kTolerance) {
        return RangeViolation{i, j, RangeDirection::kBelowZero, sum_min};
      }
    }
  }
  return Valid{};
}

int hamming_distance_excluding(const PureProfile& a, const PureProfile& b, Player skip) {
  if (a.size() != b.size()) throw UsageError("profiles differ in length");
  int d = 0;
  for (int k = 0; k < a.size(); ++k) {
    if (k != skip && a[k] != b[k]) ++d;
  }
  return d;
}

bool witness_holds(const GameView& game, const LipschitzWitness& witness) {
  const Player i = witness.player;
  if (witness.profile_a[i] != witness.profile_b[i]) return false;
  const double gap = std::abs(pure_payoff(game, i, witness.profile_a) -
                              pure_payoff(game, i, witness.profile_b));
  const int dist = hamming_distance_excluding(witness.profile_a, witness.profile_b, i);
  return gap > game.lambda() * dist + kTolerance;
}

}  // namespace lippoly
