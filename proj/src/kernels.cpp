#include "lippoly/kernels.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "lippoly/errors.hpp"

namespace lippoly::kernels {

namespace {

void check_shape(const PolymatrixGame& game, const MixedProfile& p) {
  if (p.num_players() != game.num_players() || p.num_actions() != game.num_actions()) {
    throw UsageError("profile shape does not match game");
  }
}

// Row i of the payoff table. Both kernels call exactly this, so they produce
// identical bits.
inline void payoff_row(const PolymatrixGame& game, const double* probs, Player i,
                       double* out) {
  const int n = game.num_players();
  const int m = game.num_actions();
  const double* beta = game.coefficients().data();
  std::fill(out, out + m, 0.0);
  for (int ip = 0; ip < n; ++ip) {
    if (ip == i) continue;
    const double* blk = beta + (static_cast<std::size_t>(i) * n + ip) * m * m;
    const double* q = probs + static_cast<std::size_t>(ip) * m;
    for (int j = 0; j < m; ++j) {
      const double* coef = blk + static_cast<std::size_t>(j) * m;
      double acc = 0.0;
      for (int jp = 0; jp < m; ++jp) acc += coef[jp] * q[jp];
      out[j] += acc;
    }
  }
}

inline double row_regret(std::span<const double> u, std::span<const double> q) {
  double best = u[0];
  double played = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    best = std::max(best, u[j]);
    played += q[j] * u[j];
  }
  const double r = best - played;
  return r < 0.0 ? 0.0 : r;
}

// Max regret of the profile stored in probs; scratch has m entries.
inline double max_regret(const PolymatrixGame& game, const double* probs, double* scratch) {
  const int n = game.num_players();
  const int m = game.num_actions();
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    payoff_row(game, probs, i, scratch);
    const double r = row_regret({scratch, static_cast<std::size_t>(m)},
                                {probs + static_cast<std::size_t>(i) * m,
                                 static_cast<std::size_t>(m)});
    worst = std::max(worst, r);
  }
  return worst;
}

inline void fill_grid_profile(const std::vector<std::vector<double>>& grid, int n, int m,
                              std::int64_t index, double* probs) {
  const auto g = static_cast<std::int64_t>(grid.size());
  for (int i = n - 1; i >= 0; --i) {
    const auto& point = grid[static_cast<std::size_t>(index % g)];
    std::copy(point.begin(), point.end(), probs + static_cast<std::size_t>(i) * m);
    index /= g;
  }
}

std::int64_t grid_size(std::size_t points, int n) {
  std::int64_t total = 1;
  for (int i = 0; i < n; ++i) {
    if (total > std::numeric_limits<std::int64_t>::max() / static_cast<std::int64_t>(points)) {
      throw CapacityError("grid size overflows", std::numeric_limits<double>::infinity(), 0);
    }
    total *= static_cast<std::int64_t>(points);
  }
  return total;
}

}  // namespace

PayoffTable payoff_table_serial(const PolymatrixGame& game, const MixedProfile& p) {
  check_shape(game, p);
  PayoffTable table(game.num_players(), game.num_actions());
  for (int i = 0; i < game.num_players(); ++i) {
    payoff_row(game, p.data().data(), i, table.row(i).data());
  }
  return table;
}

PayoffTable payoff_table_parallel(const PolymatrixGame& game, const MixedProfile& p) {
  check_shape(game, p);
  const int n = game.num_players();
  PayoffTable table(n, game.num_actions());
  const double* probs = p.data().data();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    payoff_row(game, probs, i, table.row(i).data());
  }
  return table;
}

std::vector<double> regrets_serial(const PayoffTable& table, const MixedProfile& p) {
  std::vector<double> out(static_cast<std::size_t>(table.num_players()));
  for (int i = 0; i < table.num_players(); ++i) out[i] = row_regret(table.row(i), p.row(i));
  return out;
}

std::vector<double> regrets_parallel(const PayoffTable& table, const MixedProfile& p) {
  const int n = table.num_players();
  std::vector<double> out(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) out[i] = row_regret(table.row(i), p.row(i));
  return out;
}

std::vector<std::vector<double>> simplex_grid(int m, int k) {
  if (m < 1 || k < 1) throw UsageError("grid needs m >= 1 and k >= 1");
  std::vector<std::vector<double>> points;
  std::vector<int> counts(static_cast<std::size_t>(m), 0);
  // Depth-first over count vectors, larger counts on earlier actions first.
  auto recurse = [&](auto&& self, int action, int remaining) -> void {
    if (action == m - 1) {
      counts[action] = remaining;
      std::vector<double> q(static_cast<std::size_t>(m));
      for (int j = 0; j < m; ++j) q[j] = static_cast<double>(counts[j]) / k;
      points.push_back(std::move(q));
      return;
    }
    for (int c = remaining; c >= 0; --c) {
      counts[action] = c;
      self(self, action + 1, remaining - c);
    }
  };
  recurse(recurse, 0, k);
  return points;
}

GridScanResult grid_scan_serial(const PolymatrixGame& game,
                                const std::vector<std::vector<double>>& grid) {
  const int n = game.num_players();
  const int m = game.num_actions();
  const std::int64_t total = grid_size(grid.size(), n);
  std::vector<double> probs(static_cast<std::size_t>(n) * m);
  std::vector<double> scratch(static_cast<std::size_t>(m));
  GridScanResult result;
  result.best_regret = std::numeric_limits<double>::infinity();
  for (std::int64_t idx = 0; idx < total; ++idx) {
    fill_grid_profile(grid, n, m, idx, probs.data());
    const double r = max_regret(game, probs.data(), scratch.data());
    if (r < result.best_regret) {
      result.best_regret = r;
      result.best_index = idx;
    }
  }
  result.profiles_scanned = total;
  return result;
}

GridScanResult grid_scan_parallel(const PolymatrixGame& game,
                                  const std::vector<std::vector<double>>& grid) {
  const int n = game.num_players();
  const int m = game.num_actions();
  const std::int64_t total = grid_size(grid.size(), n);
  GridScanResult result;
  result.best_regret = std::numeric_limits<double>::infinity();
#pragma omp parallel
  {
    std::vector<double> probs(static_cast<std::size_t>(n) * m);
    std::vector<double> scratch(static_cast<std::size_t>(m));
    double local_best = std::numeric_limits<double>::infinity();
    std::int64_t local_index = -1;
#pragma omp for schedule(static) nowait
    for (std::int64_t idx = 0; idx < total; ++idx) {
      fill_grid_profile(grid, n, m, idx, probs.data());
      const double r = max_regret(game, probs.data(), scratch.data());
      if (r < local_best) {
        local_best = r;
        local_index = idx;
      }
    }
#pragma omp critical
    {
      if (local_index >= 0 &&
          (local_best < result.best_regret ||
           (local_best == result.best_regret && local_index < result.best_index))) {
        result.best_regret = local_best;
        result.best_index = local_index;
      }
    }
  }
  result.profiles_scanned = total;
  return result;
}

MixedProfile grid_profile(const std::vector<std::vector<double>>& grid, int n,
                          std::int64_t index) {
  const int m = static_cast<int>(grid.front().size());
  MixedProfile p(n, m);
  std::vector<double> probs(static_cast<std::size_t>(n) * m);
  fill_grid_profile(grid, n, m, index, probs.data());
  return MixedProfile(n, m, std::move(probs));
}

}  // namespace lippoly::kernels
