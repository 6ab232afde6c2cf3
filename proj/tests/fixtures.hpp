#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "lippoly/game.hpp"

namespace lippoly::fixtures {

// Two players, both paid 1 for matching actions.
inline PolymatrixGame coordination(double lambda = 1.0) {
  PolymatrixGame g(2, 2, lambda);
  const std::vector<double> eye = {1.0, 0.0, 0.0, 1.0};
  g.set_block(0, 1, eye);
  g.set_block(1, 0, eye);
  return g;
}

// Player 0 wants to match, player 1 wants to mismatch.
inline PolymatrixGame matching_pennies() {
  PolymatrixGame g(2, 2, 1.0);
  g.set_block(0, 1, std::vector<double>{1.0, 0.0, 0.0, 1.0});
  g.set_block(1, 0, std::vector<double>{0.0, 1.0, 1.0, 0.0});
  return g;
}


// Each player gets a private per-action bias on top of a 0/lambda
// coefficient pattern, so payoffs spread out across actions and relevant
// sets start small enough to grow during rounding.
inline PolymatrixGame tiered(int n, int m, double lambda, double spread, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PolymatrixGame g(n, m, lambda);
  for (int i = 0; i < n; ++i) {
    std::vector<double> bias(static_cast<std::size_t>(m));
    for (double& b : bias) b = spread * u(rng);
    for (int ip = 0; ip < n; ++ip) {
      if (ip == i) continue;
      for (int j = 0; j < m; ++j) {
        for (int jp = 0; jp < m; ++jp) {
          g.set_coefficient(i, ip, j, jp, bias[j] / (n - 1) + (u(rng) < 0.5 ? 0.0 : lambda));
        }
      }
    }
  }
  return g;
}

}  // namespace lippoly::fixtures
