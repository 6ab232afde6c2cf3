#pragma once

// Data-parallel kernels. Each comes as a serial reference and an OpenMP
// version; the two must agree bit-for-bit because every output element is
// produced by the same sequence of floating-point operations.

#include <cstdint>
#include <vector>

#include "lippoly/game.hpp"

namespace lippoly::kernels {

PayoffTable payoff_table_serial(const PolymatrixGame& game, const MixedProfile& p);
PayoffTable payoff_table_parallel(const PolymatrixGame& game, const MixedProfile& p);

// Per-player regret given a precomputed payoff table.
std::vector<double> regrets_serial(const PayoffTable& table, const MixedProfile& p);
std::vector<double> regrets_parallel(const PayoffTable& table, const MixedProfile& p);

// All probability vectors over m actions whose entries are multiples of 1/k,
// in lexicographic order of their count vectors (descending on action 0).
std::vector<std::vector<double>> simplex_grid(int m, int k);

struct GridScanResult {
  std::int64_t best_index = -1;  // mixed-radix index into grid^n
  double best_regret = 0.0;
  std::int64_t profiles_scanned = 0;
};

// Exhaustive minimisation of max regret over grid^n. Ties keep the lowest
// index, so serial and parallel scans return the same profile.
GridScanResult grid_scan_serial(const PolymatrixGame& game,
                                const std::vector<std::vector<double>>& grid);
GridScanResult grid_scan_parallel(const PolymatrixGame& game,
                                  const std::vector<std::vector<double>>& grid);

// Decode a grid_scan index into a profile.
MixedProfile grid_profile(const std::vector<std::vector<double>>& grid, int n,
                          std::int64_t index);

}  // namespace lippoly::kernels
