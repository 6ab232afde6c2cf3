#include "lippoly/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "lippoly/errors.hpp"
#include "lippoly/evaluation.hpp"
#include "lippoly/kernels.hpp"

namespace lippoly {

namespace {

// Logit response: row i of the result is softmax(U_i / tau).
MixedProfile logit_response(const PayoffTable& table, double tau) {
  const int n = table.num_players();
  const int m = table.num_actions();
  MixedProfile s(n, m);
  for (int i = 0; i < n; ++i) {
    const auto u = table.row(i);
    const double top = *std::max_element(u.begin(), u.end());
    double z = 0.0;
    for (int j = 0; j < m; ++j) {
      s(i, j) = std::exp((u[j] - top) / tau);
      z += s(i, j);
    }
    for (int j = 0; j < m; ++j) s(i, j) /= z;
  }
  return s;
}

MixedProfile seeded_interior_profile(int n, int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  MixedProfile p(n, m);
  for (int i = 0; i < n; ++i) {
    double z = 0.0;
    for (int j = 0; j < m; ++j) z += (p(i, j) = unit(rng));
    for (int j = 0; j < m; ++j) p(i, j) /= z;
  }
  return p;
}

struct Best {
  MixedProfile profile;
  double regret = std::numeric_limits<double>::infinity();

  void offer(const MixedProfile& p, double r) {
    if (r < regret) {
      regret = r;
      profile = p;
    }
  }
};

double max_regret(const GameView& game, const MixedProfile& p) {
  return regret_report(game.payoff_table(p), p).max_regret;
}

// Simultaneous smoothed fictitious play: p <- (1 - a_t) p + a_t softmax(U(p)/tau).
int fictitious_play(const GameView& game, const SolverConfig& config, Best& best) {
  const int n = game.num_players();
  const int m = game.num_actions();
  const double tau =
      config.smoothing > 0.0 ? config.smoothing : config.target_epsilon / 4.0;
  MixedProfile p = config.seed == 0 ? MixedProfile::uniform(n, m)
                                    : seeded_interior_profile(n, m, config.seed);
  int t = 0;
  for (; t < config.max_iterations; ++t) {
    const PayoffTable table = game.payoff_table(p);
    best.offer(p, regret_report(table, p).max_regret);
    if (best.regret <= config.target_epsilon) return t + 1;
    const MixedProfile response = logit_response(table, tau);
    const double a = config.step_schedule == StepSchedule::kHarmonic
                         ? 1.0 / (t + 2.0)
                         : config.fixed_step;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) p(i, j) = (1.0 - a) * p(i, j) + a * response(i, j);
    }
  }
  return t;
}

// Fixed points of the logit response traced from a high temperature down.
// Unknowns are the probabilities of actions 1..m-1 of every player (action 0
// carries the remainder), so a binary game gives an n x n Newton system.
class LogitContinuation {
 public:
  LogitContinuation(const GameView& game, int newton_budget)
      : game_(game),
        n_(game.num_players()),
        m_(game.num_actions()),
        dim_(n_ * (m_ - 1)),
        budget_(newton_budget),
        // dU[i][k] / dy[ip][jp] = beta[i][ip][k][jp] - beta[i][ip][k][0]
        du_(static_cast<std::size_t>(n_) * n_ * m_ * (m_ - 1)) {
    for (int i = 0; i < n_; ++i) {
      for (int ip = 0; ip < n_; ++ip) {
        for (int k = 0; k < m_; ++k) {
          for (int jp = 1; jp < m_; ++jp) {
            du_[du_index(i, ip, k, jp)] =
                ip == i ? 0.0
                        : game.coefficient(i, ip, k, jp) - game.coefficient(i, ip, k, 0);
          }
        }
      }
    }
  }

  int newton_steps() const { return steps_; }

  void run(double target, Best& best) {
    MixedProfile p = MixedProfile::uniform(n_, m_);
    double tau = 1.0;
    double ratio = 0.5;
    const double tau_floor = target * 1e-3;
    while (steps_ < budget_) {
      const double next_tau = tau * ratio;
      MixedProfile q = p;
      if (solve_at(next_tau, q)) {
        p = std::move(q);
        tau = next_tau;
        const double r = max_regret(game_, p);
        best.offer(p, r);
        if (r <= target || tau < tau_floor) return;
        ratio = std::max(ratio * ratio, 0.3);
      } else {
        ratio = std::sqrt(ratio);
        if (ratio > 0.999) return;
      }
    }
  }

 private:
  std::size_t du_index(int i, int ip, int k, int jp) const {
    return ((static_cast<std::size_t>(i) * n_ + ip) * m_ + k) * (m_ - 1) + (jp - 1);
  }

  // Newton iterations for p = softmax(U(p) / tau), starting from p.
  bool solve_at(double tau, MixedProfile& p) {
    Eigen::MatrixXd jac(dim_, dim_);
    Eigen::VectorXd residual(dim_);
    for (int it = 0; it < 30 && steps_ < budget_; ++it) {
      const PayoffTable table = game_.payoff_table(p);
      const MixedProfile s = logit_response(table, tau);
      double worst = 0.0;
      for (int i = 0; i < n_; ++i) {
        for (int j = 1; j < m_; ++j) {
          const double f = p(i, j) - s(i, j);
          residual(i * (m_ - 1) + j - 1) = f;
          worst = std::max(worst, std::abs(f));
        }
      }
      if (!std::isfinite(worst)) return false;
      if (worst < 1e-13) return true;

      // J = I - dS/dy, dS_ij/dU_ik = s_ij (delta_jk - s_ik) / tau.
      jac.setIdentity();
      for (int i = 0; i < n_; ++i) {
        for (int j = 1; j < m_; ++j) {
          const int r = i * (m_ - 1) + j - 1;
          for (int ip = 0; ip < n_; ++ip) {
            if (ip == i) continue;
            for (int jp = 1; jp < m_; ++jp) {
              double d = 0.0;
              for (int k = 0; k < m_; ++k) {
                const double ds = s(i, j) * ((j == k ? 1.0 : 0.0) - s(i, k)) / tau;
                d += ds * du_[du_index(i, ip, k, jp)];
              }
              jac(r, ip * (m_ - 1) + jp - 1) -= d;
            }
          }
        }
      }
      const Eigen::VectorXd delta = jac.partialPivLu().solve(-residual);
      ++steps_;
      if (!delta.allFinite()) return false;
      for (int i = 0; i < n_; ++i) {
        double rest = 1.0;
        for (int j = 1; j < m_; ++j) {
          p(i, j) = std::max(p(i, j) + delta(i * (m_ - 1) + j - 1), 1e-300);
          rest -= p(i, j);
        }
        p(i, 0) = std::max(rest, 1e-300);
        double z = 0.0;
        for (int j = 0; j < m_; ++j) z += p(i, j);
        for (int j = 0; j < m_; ++j) p(i, j) /= z;
      }
    }
    return false;
  }

  const GameView& game_;
  int n_, m_, dim_;
  int budget_;
  int steps_ = 0;
  std::vector<double> du_;
};

}  // namespace

void SolverConfig::validate() const {
  if (!(target_epsilon > 0.0)) throw UsageError("target_epsilon must be positive");
  if (max_iterations < 1) throw UsageError("max_iterations must be at least 1");
  if (step_schedule == StepSchedule::kFixed && !(fixed_step > 0.0 && fixed_step <= 1.0)) {
    throw UsageError("fixed_step must lie in (0, 1]");
  }
  if (smoothing < 0.0) throw UsageError("smoothing must be non-negative");
  if (uniform_grid_k && *uniform_grid_k < 1) throw UsageError("grid k must be positive");
}

double default_target_epsilon(const GameView& game) {
  const int m = game.num_actions();
  if (m == 2) return game.lambda() / 8.0;
  const double shrink = static_cast<double>(m - 1) / m;
  return shrink * shrink * game.lambda();
}

SolverConfig default_solver_config(const GameView& game) {
  SolverConfig config;
  config.target_epsilon = default_target_epsilon(game);
  return config;
}

SolveResult solve_mixed(const GameView& game, const SolverConfig& config) {
  config.validate();
  if (config.uniform_grid_k) {
    SolveResult grid = brute_force_kuniform(to_dense(game), *config.uniform_grid_k);
    grid.converged = grid.achieved_max_regret <= config.target_epsilon;
    return grid;
  }

  Best best;
  SolveResult result;
  result.iterations_used = fictitious_play(game, config, best);
  result.method = "fictitious_play";
  if (best.regret > config.target_epsilon && config.refine) {
    const double before = best.regret;
    LogitContinuation continuation(game, config.max_newton_steps);
    continuation.run(config.target_epsilon, best);
    result.iterations_used += continuation.newton_steps();
    if (best.regret < before) result.method = "logit_continuation";
  }
  result.profile = std::move(best.profile);
  result.achieved_max_regret = max_regret(game, result.profile);
  result.converged = result.achieved_max_regret <= config.target_epsilon;
  return result;
}

double kuniform_grid_size(int n, int m, int k) {
  // C(k + m - 1, m - 1) points per player.
  double points = 1.0;
  for (int r = 1; r <= m - 1; ++r) points = points * (k + r) / r;
  return std::pow(std::round(points), n);
}

SolveResult brute_force_kuniform(const PolymatrixGame& game, int k) {
  if (k < 1) throw UsageError("grid k must be positive");
  const double size = kuniform_grid_size(game.num_players(), game.num_actions(), k);
  if (size > kGridProfileLimit) {
    throw CapacityError("k-uniform grid has about " + std::to_string(size) +
                            " profiles, limit is " + std::to_string(kGridProfileLimit),
                        size, kGridProfileLimit);
  }
  const auto grid = kernels::simplex_grid(game.num_actions(), k);
  const auto scan = kernels::grid_scan_parallel(game, grid);
  SolveResult result;
  result.profile = kernels::grid_profile(grid, game.num_players(), scan.best_index);
  result.achieved_max_regret = max_regret(game, result.profile);
  result.iterations_used = static_cast<int>(scan.profiles_scanned);
  result.converged = true;
  result.method = "grid";
  return result;
}

}  // namespace lippoly
