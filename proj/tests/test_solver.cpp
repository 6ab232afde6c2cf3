#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "lippoly/errors.hpp"
#include "lippoly/evaluation.hpp"
#include "lippoly/generator.hpp"
#include "lippoly/kernels.hpp"
#include "lippoly/solver.hpp"
#include "oracles.hpp"

using namespace lippoly;

TEST_CASE("default targets") {
  CHECK(default_target_epsilon(PolymatrixGame(10, 2, 0.1)) == doctest::Approx(0.1 / 8));
  CHECK(default_target_epsilon(PolymatrixGame(10, 4, 0.1)) == doctest::Approx(0.75 * 0.75 * 0.1));
}

TEST_CASE("zero game converges immediately") {
  PolymatrixGame g(6, 3, 0.5);
  const auto r = solve_mixed(g, default_solver_config(g));
  CHECK(r.converged);
  CHECK(r.achieved_max_regret == 0.0);
}

TEST_CASE("coordination game") {
  const auto g = fixtures::coordination();
  auto cfg = default_solver_config(g);
  const auto r = solve_mixed(g, cfg);
  CHECK(r.converged);
  CHECK(r.achieved_max_regret <= cfg.target_epsilon);
  CHECK(regret_report(g, r.profile).max_regret == r.achieved_max_regret);
}

TEST_CASE("matching pennies on the 2-uniform grid") {
  const auto g = fixtures::matching_pennies();
  const auto r = brute_force_kuniform(g, 2);
  CHECK(r.converged);
  CHECK(r.method == "grid");
  CHECK(r.achieved_max_regret == 0.0);
  CHECK(r.profile(0, 0) == 0.5);
  CHECK(r.profile(1, 0) == 0.5);
}

TEST_CASE("brute force matches an independent enumeration") {
  const auto g = generate({.n = 3, .m = 2, .lambda = 0.3, .seed = 41});
  const int k = 50;
  const auto r = brute_force_kuniform(g, k);
  double best = 1e300;
  for (int a = 0; a <= k; ++a) {
    for (int b = 0; b <= k; ++b) {
      for (int c = 0; c <= k; ++c) {
        MixedProfile p(3, 2, {double(a) / k, double(k - a) / k, double(b) / k, double(k - b) / k,
                              double(c) / k, double(k - c) / k});
        double worst = 0.0;
        for (int i = 0; i < 3; ++i) worst = std::max(worst, oracle::enumerated_regret(g, i, p));
        best = std::min(best, worst);
      }
    }
  }
  CHECK(std::abs(r.achieved_max_regret - best) <= 1e-9);
  CHECK(kuniform_grid_size(3, 2, k) == 51.0 * 51.0 * 51.0);
}

TEST_CASE("oversized grids are refused") {
  PolymatrixGame g(20, 3, 0.05);
  CHECK_THROWS_AS(brute_force_kuniform(g, 10), CapacityError);
}

TEST_CASE("property: grid optimum never exceeds any grid profile's regret") {
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 3;
    const auto g = generate({.n = n, .m = 2, .lambda = 1.0 / n, .seed = 60u + trial});
    const int k = 8;
    const auto grid = brute_force_kuniform(g, k);
    const auto solved = solve_mixed(g, default_solver_config(g));
    MixedProfile rounded(n, 2);
    for (int i = 0; i < n; ++i) {
      const double q = std::round(solved.profile(i, 0) * k) / k;
      rounded(i, 0) = q;
      rounded(i, 1) = 1.0 - q;
    }
    CHECK(grid.achieved_max_regret <= regret_report(g, rounded).max_regret + 1e-9);
  }
}

TEST_CASE("determinism and reported regret") {
  const auto g = generate({.n = 40, .m = 3, .lambda = 1.0 / 40, .seed = 5});
  auto cfg = default_solver_config(g);
  cfg.seed = 12;
  const auto a = solve_mixed(g, cfg);
  const auto b = solve_mixed(g, cfg);
  CHECK(a.profile == b.profile);
  CHECK(a.achieved_max_regret == b.achieved_max_regret);
  CHECK(a.achieved_max_regret == regret_report(g, a.profile).max_regret);
  CHECK(a.converged == (a.achieved_max_regret <= cfg.target_epsilon));
}

TEST_CASE("binary games reach lambda/8") {
  for (int n : {20, 50, 200}) {
    const auto g = generate({.n = n, .m = 2, .lambda = 1.0 / n, .seed = 7u + n});
    const auto r = solve_mixed(g, default_solver_config(g));
    CHECK_MESSAGE(r.converged, "n=" << n << " regret=" << r.achieved_max_regret);
  }
}

TEST_CASE("invalid configurations") {
  SolverConfig cfg;
  cfg.target_epsilon = -1.0;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
}
