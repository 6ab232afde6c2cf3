#pragma once

#include <cstdint>
#include <string>

#include "lippoly/game.hpp"

namespace lippoly {

enum class Family { kUniformCoefficients, kSparse, kCoordinationMix };

struct GeneratorSpec {
  int n = 10;
  int m = 2;
  double lambda = 0.1;
  Family family = Family::kUniformCoefficients;
  double density = 0.5;  // kSparse: probability that a pair block is non-zero
  double weight = 0.5;   // kCoordinationMix: share of the lambda * identity term
  std::uint64_t seed = 0;
};

// Random valid game. Coefficients are drawn in [0, lambda], rows with a
// negative minimum are shifted up, and the whole array is scaled down when a
// payoff could exceed one. Deterministic in the seed; the result always
// passes check_game. Throws UsageError for infeasible specs.
PolymatrixGame generate(const GeneratorSpec& spec);

Family parse_family(const std::string& name);
std::string family_name(Family family);

}  // namespace lippoly
