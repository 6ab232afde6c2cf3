#include "lippoly/game.hpp"

#include <cmath>
#include <string>

#include "lippoly/errors.hpp"
#include "lippoly/kernels.hpp"

namespace lippoly {

void PureProfile::validate(int n, int m) const {
  if (size() != n) {
    throw UsageError("pure profile has " + std::to_string(size()) +
                     " entries, expected " + std::to_string(n));
  }
  for (int i = 0; i < n; ++i) {
    if (actions[i] < 0 || actions[i] >= m) {
      throw UsageError("player " + std::to_string(i) + " action " +
                       std::to_string(actions[i]) + " out of range [0, " +
                       std::to_string(m) + ")");
    }
  }
}

MixedProfile::MixedProfile(int n, int m)
    : n_(n), m_(m), probs_(static_cast<std::size_t>(n) * m, 0.0) {
  if (n < 0 || m < 1) throw UsageError("bad profile shape");
}

MixedProfile::MixedProfile(int n, int m, std::vector<double> probs)
    : n_(n), m_(m), probs_(std::move(probs)) {
  if (n < 0 || m < 1 || probs_.size() != static_cast<std::size_t>(n) * m) {
    throw UsageError("mixed profile data does not match shape " +
                     std::to_string(n) + "x" + std::to_string(m));
  }
}

MixedProfile MixedProfile::uniform(int n, int m) {
  return MixedProfile(n, m, std::vector<double>(static_cast<std::size_t>(n) * m, 1.0 / m));
}

MixedProfile MixedProfile::from_pure(const PureProfile& pure, int m) {
  pure.validate(pure.size(), m);
  MixedProfile p(pure.size(), m);
  for (int i = 0; i < pure.size(); ++i) p(i, pure[i]) = 1.0;
  return p;
}

void MixedProfile::set_pure(Player i, Action j) {
  auto r = row(i);
  for (auto& x : r) x = 0.0;
  r[static_cast<std::size_t>(j)] = 1.0;
}

bool MixedProfile::row_is_pure(Player i) const {
  int ones = 0;
  for (double x : row(i)) {
    if (x == 1.0) {
      ++ones;
    } else if (x != 0.0) {
      return false;
    }
  }
  return ones == 1;
}

bool MixedProfile::is_pure_valued() const {
  for (int i = 0; i < n_; ++i) {
    if (!row_is_pure(i)) return false;
  }
  return true;
}

std::optional<PureProfile> MixedProfile::to_pure() const {
  PureProfile a(n_, 0);
  for (int i = 0; i < n_; ++i) {
    if (!row_is_pure(i)) return std::nullopt;
    for (int j = 0; j < m_; ++j) {
      if ((*this)(i, j) == 1.0) a[i] = j;
    }
  }
  return a;
}

void MixedProfile::validate(int n, int m) const {
  if (n_ != n || m_ != m) {
    throw ValidationError("profile shape " + std::to_string(n_) + "x" +
                          std::to_string(m_) + " does not match game " +
                          std::to_string(n) + "x" + std::to_string(m));
  }
  for (int i = 0; i < n_; ++i) {
    double sum = 0.0;
    for (int j = 0; j < m_; ++j) {
      const double x = (*this)(i, j);
      if (!std::isfinite(x) || x < 0.0) {
        throw ValidationError("player " + std::to_string(i) + " has invalid probability " +
                              std::to_string(x) + " on action " + std::to_string(j));
      }
      sum += x;
    }
    if (std::abs(sum - 1.0) > kTolerance) {
      throw ValidationError("player " + std::to_string(i) + " row sums to " +
                            std::to_string(sum));
    }
  }
}

PolymatrixGame::PolymatrixGame(int n, int m, double lambda)
    : PolymatrixGame(n, m, lambda,
                     std::vector<double>(static_cast<std::size_t>(n) * n * m * m, 0.0)) {}

PolymatrixGame::PolymatrixGame(int n, int m, double lambda, std::vector<double> beta)
    : n_(n), m_(m), lambda_(lambda), beta_(std::move(beta)) {
  if (n < 1) throw UsageError("game needs at least one player");
  if (m < 2) throw UsageError("game needs at least two actions per player");
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw UsageError("lambda must lie in (0, 1], got " + std::to_string(lambda));
  }
  if (beta_.size() != static_cast<std::size_t>(n) * n * m * m) {
    throw UsageError("coefficient array has wrong size");
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      for (int jp = 0; jp < m; ++jp) beta_[index(i, i, j, jp)] = 0.0;
    }
  }
}

void PolymatrixGame::check_indices(Player i, Player ip, Action j, Action jp) const {
  if (i < 0 || i >= n_ || ip < 0 || ip >= n_ || j < 0 || j >= m_ || jp < 0 || jp >= m_) {
    throw UsageError("coefficient index out of range");
  }
}

double PolymatrixGame::at(Player i, Player ip, Action j, Action jp) const {
  check_indices(i, ip, j, jp);
  return coefficient(i, ip, j, jp);
}

void PolymatrixGame::set_coefficient(Player i, Player ip, Action j, Action jp,
                                     double value) {
  check_indices(i, ip, j, jp);
  if (i == ip) throw UsageError("self-play block is not part of the game");
  beta_[index(i, ip, j, jp)] = value;
}

std::span<const double> PolymatrixGame::block(Player i, Player ip) const {
  check_indices(i, ip, 0, 0);
  return {beta_.data() + index(i, ip, 0, 0), static_cast<std::size_t>(m_) * m_};
}

void PolymatrixGame::set_block(Player i, Player ip, std::span<const double> matrix) {
  if (matrix.size() != static_cast<std::size_t>(m_) * m_) {
    throw UsageError("block must have m*m entries");
  }
  for (int j = 0; j < m_; ++j) {
    for (int jp = 0; jp < m_; ++jp) {
      set_coefficient(i, ip, j, jp, matrix[static_cast<std::size_t>(j) * m_ + jp]);
    }
  }
}

PayoffTable PolymatrixGame::payoff_table(const MixedProfile& p) const {
  return kernels::payoff_table_parallel(*this, p);
}

PolymatrixGame to_dense(const GameView& view) {
  if (const auto* dense = dynamic_cast<const PolymatrixGame*>(&view)) return *dense;
  const int n = view.num_players();
  const int m = view.num_actions();
  PolymatrixGame game(n, m, view.lambda());
  for (int i = 0; i < n; ++i) {
    for (int ip = 0; ip < n; ++ip) {
      if (ip == i) continue;
      for (int j = 0; j < m; ++j) {
        for (int jp = 0; jp < m; ++jp) {
          game.set_coefficient(i, ip, j, jp, view.coefficient(i, ip, j, jp));
        }
      }
    }
  }
  return game;
}

}  // namespace lippoly
