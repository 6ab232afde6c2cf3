#pragma once

#include <variant>

#include "lippoly/game.hpp"

namespace lippoly {

struct Valid {};

enum class RangeDirection { kAboveOne, kBelowZero };

// For some (player, action), the largest (or smallest) achievable payoff
// leaves [0, 1].
struct RangeViolation {
  Player player = 0;
  Action action = 0;
  RangeDirection direction = RangeDirection::kAboveOne;
  double extreme_payoff = 0.0;
};

// Two pure profiles that agree at `player` but whose payoffs to `player`
// differ by more than lambda times the number of other coordinates in which
// they differ.
struct LipschitzWitness {
  Player player = 0;
  PureProfile profile_a;
  PureProfile profile_b;
  double observed_gap = 0.0;
  double allowed_gap = 0.0;
};

using CheckResult = std::variant<Valid, RangeViolation, LipschitzWitness>;

// Coefficient-difference scan (n^2 m^3 comparisons) followed by the 2nm range
// inequalities. A Lipschitz violation is reported in preference to a range
// violation; among Lipschitz violations the largest gap wins, ties going to
// the lexicographically first (i, ip, j, jp1, jp2).
CheckResult check_game(const GameView& game);

// max over i, ip, j, jp1, jp2 of |beta[i][ip][j][jp1] - beta[i][ip][j][jp2]|.
double max_coefficient_gap(const GameView& game);

// Number of coordinates other than `skip` in which a and b differ.
int hamming_distance_excluding(const PureProfile& a, const PureProfile& b, Player skip);

// Recomputes the witness from pure payoffs: profiles agree at the player and
// the recomputed gap exceeds lambda * Hamming distance by more than kTolerance.
bool witness_holds(const GameView& game, const LipschitzWitness& witness);

inline bool is_valid(const CheckResult& r) { return std::holds_alternative<Valid>(r); }

}  // namespace lippoly
