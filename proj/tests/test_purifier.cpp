#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "lippoly/errors.hpp"
#include "lippoly/evaluation.hpp"
#include "lippoly/generator.hpp"
#include "lippoly/purifier.hpp"
#include "lippoly/solver.hpp"
#include "oracles.hpp"

using namespace lippoly;

namespace {

MixedProfile solved(const PolymatrixGame& g) {
  const auto r = solve_mixed(g, default_solver_config(g));
  REQUIRE(r.converged);
  return r.profile;
}

std::vector<Player> shuffled_order(int n, std::uint64_t seed) {
  std::vector<Player> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

bool all_ok(const std::vector<BoundCheck>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.ok; });
}

// Player 0 earns 0.9 on action 0 whatever player 1 does; player 1 earns 0.
PolymatrixGame lopsided_binary() {
  PolymatrixGame g(2, 2, 1.0);
  g.set_block(0, 1, std::vector<double>{0.9, 0.9, 0.0, 0.0});
  return g;
}

}  // namespace

TEST_CASE("binary thresholds") {
  const auto t = binary_thresholds(8, 0.125);
  CHECK(t.epsilon0 == 0.125 / 8);
  CHECK(t.wsne_bound == doctest::Approx(0.125 * std::sqrt(8.0)));
  CHECK(t.cost_bound == doctest::Approx(5.0 * 0.125 * 0.125 * 64));
  CHECK(t.delta == doctest::Approx(0.125 * std::cbrt(20.0 * 64)));
  CHECK(t.regret_bound == doctest::Approx(0.125 * std::cbrt(70.0 * 64)));
}

TEST_CASE("ane_to_wsne_binary") {
  SUBCASE("pure zero-regret input is unchanged") {
    const auto g = fixtures::coordination();
    const auto p = MixedProfile::from_pure(PureProfile({1, 1}), 2);
    CHECK(ane_to_wsne_binary(g, p) == p);
  }
  SUBCASE("strong discrepancy forces the best response") {
    const auto g = lopsided_binary();
    MixedProfile p(2, 2, {0.9, 0.1, 0.5, 0.5});
    CHECK(discrepancy(g, 0, p) == doctest::Approx(-0.9));
    const auto out = ane_to_wsne_binary(g, p);
    CHECK(out(0, 0) == 1.0);
    CHECK(out(0, 1) == 0.0);
    CHECK(out(1, 0) == 0.5);
  }
  SUBCASE("output is a lambda sqrt(n) WSNE") {
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 4 + trial % 7;
      const auto g = generate({.n = n, .m = 2, .lambda = 1.0 / n, .seed = 3000u + trial});
      const auto w = ane_to_wsne_binary(g, solved(g));
      CHECK(oracle::support_regret(g, w) <= g.lambda() * std::sqrt(double(n)) + 1e-9);
    }
  }
  SUBCASE("input quality is enforced") {
    const auto g = fixtures::coordination();
    // Regret 0.5 against a required 1/8.
    MixedProfile bad(2, 2, {0.5, 0.5, 1.0, 0.0});
    CHECK_THROWS_AS(ane_to_wsne_binary(g, bad), PreconditionViolation);
    try {
      ane_to_wsne_binary(g, bad);
    } catch (const PreconditionViolation& e) {
      CHECK(e.player() == 0);
      CHECK(e.required() == 0.125);
    }
    // Regret 0.2: above 1/8 but within twice that.
    MixedProfile near(2, 2, {0.8, 0.2, 1.0, 0.0});
    const auto step = ane_to_wsne_binary_step(g, near);
    CHECK(step.precondition_relaxed);
  }
  SUBCASE("m != 2 is unsupported") {
    CHECK_THROWS_AS(ane_to_wsne_binary(PolymatrixGame(2, 3, 0.5), MixedProfile::uniform(2, 3)),
                    UnsupportedOperation);
  }
}

TEST_CASE("purify_rounding_binary") {
  SUBCASE("already pure input") {
    const auto g = generate({.n = 6, .m = 2, .lambda = 1.0 / 6, .seed = 4});
    const auto first = purify_rounding_binary(g, ane_to_wsne_binary(g, solved(g)));
    const auto again = purify_rounding_binary(g, MixedProfile::from_pure(first.profile, 2));
    CHECK(again.profile == first.profile);
    const auto& c = again.trace.cost;
    CHECK(std::all_of(c.begin(), c.end(), [&](double x) { return x == c.front(); }));
  }
  SUBCASE("single mixed player rounds against A") {
    for (int trial = 0; trial < 30; ++trial) {
      const int n = 6;
      const auto g = generate({.n = n, .m = 2, .lambda = 1.0 / n, .seed = 77u + trial});
      auto w = ane_to_wsne_binary(g, solved(g));
      const int mixed = trial % n;
      for (int i = 0; i < n; ++i) {
        if (i != mixed && !w.row_is_pure(i)) w.set_pure(i, w(i, 1) >= 0.5 ? 1 : 0);
      }
      if (w.row_is_pure(mixed)) {
        w(mixed, 0) = 0.5;
        w(mixed, 1) = 0.5;
      }
      BinaryRounding r;
      try {
        r = purify_rounding_binary(g, w);
      } catch (const PreconditionViolation&) {
        continue;  // the edited profile is no longer a WSNE
      }
      // Independent recomputation of A.
      auto q0 = w, q1 = w;
      q0.set_pure(mixed, 0);
      q1.set_pure(mixed, 1);
      const double cut = g.lambda() * std::sqrt(double(n)) + 1e-9;
      double a = 0.0;
      for (int k = 0; k < n; ++k) {
        if (std::abs(discrepancy(g, k, w)) > cut) continue;
        const double c = discrepancy(g, k, q0);
        const double l = discrepancy(g, k, q1) - c;
        // Coefficient cross-check of the slope.
        const double direct = (g.at(k, mixed, 1, 1) - g.at(k, mixed, 0, 1)) -
                              (g.at(k, mixed, 1, 0) - g.at(k, mixed, 0, 0));
        CHECK(l == doctest::Approx(direct).epsilon(1e-12));
        a += 2.0 * c * l;
      }
      const auto& step = r.trace.steps[mixed];
      CHECK(step.was_mixed);
      CHECK(step.coefficient == doctest::Approx(a).epsilon(1e-12));
      CHECK(a * (step.p_after - step.p_before) <= 1e-12);
    }
  }
  SUBCASE("terminal cost on 100 pipelines at n = 50") {
    for (int trial = 0; trial < 100; ++trial) {
      const auto g = generate({.n = 50, .m = 2, .lambda = 1.0 / 50, .seed = 5000u + trial});
      const auto w = ane_to_wsne_binary(g, solved(g));
      const auto r = purify_rounding_binary(g, w, {.trace = TraceLevel::kPotentials});
      CHECK(r.trace.terminal_cost <= 5.0 * 50 * 50 / (50.0 * 50.0) + 1e-9);
    }
  }
}

TEST_CASE("property: binary trace invariants from full traces") {
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 10 + 5 * (trial % 5);
    const auto g = generate({.n = n,
                             .m = 2,
                             .lambda = 1.0 / n,
                             .family = static_cast<Family>(trial % 3),
                             .seed = 700u + trial});
    const auto w = ane_to_wsne_binary(g, solved(g));
    const auto r = purify_rounding_binary(g, w);
    const auto& tr = r.trace;
    REQUIRE(tr.step_profiles.size() == static_cast<std::size_t>(n + 1));
    REQUIRE(tr.relevant_sets.size() == static_cast<std::size_t>(n + 1));
    const double cut = g.lambda() * std::sqrt(double(n)) + 1e-9;
    for (int t = 1; t <= n; ++t) {
      const auto& before = tr.step_profiles[t - 1];
      const auto& after = tr.step_profiles[t];
      const auto& s_prev = tr.relevant_sets[t - 1];
      const auto& s_next = tr.relevant_sets[t];
      // Monotone relevant sets.
      CHECK(std::includes(s_next.begin(), s_next.end(), s_prev.begin(), s_prev.end()));
      const Player i = tr.order[t - 1];
      if (!before.row_is_pure(i)) {
        auto q0 = before, q1 = before;
        q0.set_pure(i, 0);
        q1.set_pure(i, 1);
        double a = 0.0;
        for (Player k : s_prev) {
          const double c = discrepancy(g, k, q0);
          a += 2.0 * c * (discrepancy(g, k, q1) - c);
        }
        CHECK(a * (after(i, 1) - before(i, 1)) <= 1e-12);
      }
      for (int k = 0; k < n; ++k) {
        const bool member = std::binary_search(s_next.begin(), s_next.end(), k);
        const double d0 = discrepancy(g, k, before), d1 = discrepancy(g, k, after);
        if (!member) {
          CHECK((d0 > 0) == (d1 > 0));
          CHECK(std::abs(d1) > cut);
        }
      }
    }
    // Players outside S^(n) play an exact best response.
    const auto& s_n = tr.relevant_sets.back();
    for (int k = 0; k < n; ++k) {
      if (!std::binary_search(s_n.begin(), s_n.end(), k)) {
        CHECK(oracle::pure_regret(g, k, r.profile) <= 1e-9);
      }
    }
  }
}

TEST_CASE("correct_binary") {
  SUBCASE("nobody above delta leaves the profile alone") {
    const auto g = generate({.n = 20, .m = 2, .lambda = 0.05, .seed = 6});
    const auto w = ane_to_wsne_binary(g, solved(g));
    auto r = purify_rounding_binary(g, w);
    const auto out = correct_binary(g, r.profile, r.trace);
    CHECK(r.trace.switched_players.empty());
    CHECK(out == r.profile);
  }
  SUBCASE("switchers and final regret") {
    for (int trial = 0; trial < 40; ++trial) {
      const int n = 20 + 10 * (trial % 4);
      const auto g = generate({.n = n, .m = 2, .lambda = 1.0 / n, .seed = 900u + trial});
      const auto w = ane_to_wsne_binary(g, solved(g));
      auto r = purify_rounding_binary(g, w, {.trace = TraceLevel::kOff});
      const auto out = correct_binary(g, r.profile, r.trace);
      const double delta = g.lambda() * std::cbrt(20.0 * n * n);
      CHECK(double(r.trace.switched_players.size()) <=
            r.trace.terminal_cost / (delta * delta) + 1e-9);
      CHECK(oracle::pure_max_regret(g, out) <= g.lambda() * std::cbrt(70.0 * n * n) + 1e-9);
      CHECK(oracle::pure_max_regret(g, out) == doctest::Approx(r.trace.final_max_regret).epsilon(1e-12));
    }
  }
  SUBCASE("breaches are reported with the full check list") {
    const auto g = fixtures::coordination();
    BinaryPurifyTrace tr;
    tr.delta = 0.5;
    tr.terminal_cost = 0.0;
    tr.regret_bound = 10.0;
    try {
      correct_binary(g, PureProfile({0, 1}), tr);
      FAIL("expected a breach");
    } catch (const InvariantBreach& e) {
      REQUIRE(!e.checks().empty());
      CHECK(e.checks().front().name == "step 3 switchers");
      CHECK_FALSE(e.checks().front().ok);
    }
  }
}

TEST_CASE("property: Steps 1 and 3 are order independent") {
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 12 + trial;
    const auto g = generate({.n = n, .m = 2, .lambda = 1.0 / n, .seed = 40u + trial});
    const auto p = solved(g);
    const auto base = ane_to_wsne_binary(g, p);
    const auto perm = ane_to_wsne_binary(g, p, {.order = shuffled_order(n, trial)});
    CHECK(base == perm);

    auto r = purify_rounding_binary(g, base);
    // Pretend a larger cost so any profile passes the switch-count check and
    // a small delta so several players actually switch.
    auto t1 = r.trace;
    t1.delta = 1e-6;
    t1.terminal_cost = 1e9;
    t1.regret_bound = 10.0;
    auto t2 = t1;
    t2.order = shuffled_order(n, 100 + trial);
    const auto a = correct_binary(g, r.profile, t1);
    const auto b = correct_binary(g, r.profile, t2);
    CHECK(a == b);
    CHECK(t1.switched_players == t2.switched_players);

    // m-action stages.
    const auto gm = generate({.n = n, .m = 3, .lambda = 1.0 / n, .seed = 80u + trial});
    const auto pm = solve_mixed(gm, default_solver_config(gm)).profile;
    CHECK(ane_to_wsne_m(gm, pm) == ane_to_wsne_m(gm, pm, {.order = shuffled_order(n, trial)}));
  }
}

TEST_CASE("m-action thresholds and delta_1") {
  for (int m : {2, 3, 4, 8}) {
    for (int n : {5, 20, 50}) {
      const double lambda = 1.0 / n;
      const auto t = m_action_thresholds(n, m, lambda);
      const double frac = (m - 1.0) / m;
      CHECK(t.epsilon0 == doctest::Approx(frac * frac * lambda));
      CHECK(t.epsilon1 == doctest::Approx(2.0 * std::sqrt(2.0 * n * lambda * t.epsilon0)));
      const double k = 32.0 * n * n * lambda * lambda * lambda * m * std::log(3.0 * m);
      auto f = [&](double d) { return d + k / (d * d); };
      const double numeric = oracle::golden_min(f, 1e-6, 100.0);
      CHECK(t.delta1 == doctest::Approx(numeric).epsilon(1e-6));
      CHECK(f(t.delta1) == doctest::Approx(1.5 * t.delta1).epsilon(1e-12));
      CHECK(f(t.delta1) == doctest::Approx(t.regret_bound).epsilon(1e-12));
    }
  }
}

TEST_CASE("variance addition formula") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const int k = 1 + trial % 9;
    std::vector<double> xs(static_cast<std::size_t>(k));
    for (double& x : xs) x = u(rng);
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= k;
    const double var = oracle::variance(xs);
    const double y = u(rng);
    auto grown = xs;
    grown.push_back(y);
    CHECK(variance_addition_delta(k, mean, var, y) ==
          doctest::Approx(oracle::variance(grown) - var).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("ane_to_wsne_m") {
  SUBCASE("pure zero-regret input is unchanged") {
    PolymatrixGame g(3, 3, 0.3);
    const auto p = MixedProfile::from_pure(PureProfile({0, 2, 1}), 3);
    CHECK(ane_to_wsne_m(g, p) == p);
  }
  SUBCASE("mass on a high-regret action moves to the best response") {
    PolymatrixGame g(2, 3, 0.5);
    const auto t = m_action_thresholds(2, 3, 0.5);
    const double x = 2.0 * t.delta0;
    REQUIRE(x <= 1.0);
    g.set_block(0, 1, std::vector<double>{x, x, x, 0, 0, 0, 0, 0, 0});
    MixedProfile p(2, 3, {0.95, 0.05, 0.0, 0.2, 0.3, 0.5});
    const auto out = ane_to_wsne_m(g, p);
    CHECK(out(0, 0) == doctest::Approx(1.0));
    CHECK(out(0, 1) == 0.0);
    CHECK(out(1, 2) == 0.5);
  }
  SUBCASE("output WSNE property on random m = 4 games") {
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 3 + trial % 4;
      const auto g = generate({.n = n, .m = 4, .lambda = 1.0 / n, .seed = 6100u + trial});
      const auto w = ane_to_wsne_m(g, solved(g));
      const auto t = m_action_thresholds(n, 4, g.lambda());
      CHECK(oracle::support_regret(g, w) <= t.epsilon1 + 1e-9);
    }
  }
}

TEST_CASE("purify_rounding_m") {
  SUBCASE("degenerate m = 2 runs and agrees in kind with the binary path") {
    const auto g = generate({.n = 20, .m = 2, .lambda = 0.05, .seed = 31});
    const auto p = solved(g);
    const auto m_path = purify(g, p, PurifyMode::kMAction);
    const auto b_path = purify(g, p, PurifyMode::kBinary);
    CHECK(m_path.mode == PurifyMode::kMAction);
    CHECK(b_path.mode == PurifyMode::kBinary);
    CHECK(m_path.final_max_regret <= m_path.regret_bound + 1e-9);
    CHECK(b_path.final_max_regret <= b_path.regret_bound + 1e-9);
  }
  SUBCASE("terminal variance on random m = 4, n = 50 games") {
    for (int trial = 0; trial < 10; ++trial) {
      const auto g = generate({.n = 50, .m = 4, .lambda = 0.02, .seed = 7100u + trial});
      const auto w = ane_to_wsne_m(g, solved(g));
      const auto r = purify_rounding_m(g, w, {.trace = TraceLevel::kPotentials});
      CHECK(r.trace.terminal_variance < 8.0 * 50 * 50 * 0.02 * 0.02 * std::log(12.0) + 1e-9);
      CHECK(r.trace.initial_variance <= 2.0 * std::pow(50 * 0.02 * 0.75, 2) + 1e-9);
    }
  }
}

TEST_CASE("property: m-action trace invariants from full traces") {
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 6 + trial % 10;
    const int m = 3 + trial % 3;
    // Coordination-heavy games keep relevant sets small enough to grow.
    const auto g = generate({.n = n,
                             .m = m,
                             .lambda = 1.0 / n,
                             .family = Family::kCoordinationMix,
                             .weight = 0.9,
                             .seed = 8100u + trial});
    const auto w = ane_to_wsne_m(g, solved(g));
    const auto r = purify_rounding_m(g, w);
    const auto& tr = r.trace;
    REQUIRE(tr.snapshots.size() == static_cast<std::size_t>(n + 1));
    for (int t = 0; t <= n; ++t) {
      const auto& prof = tr.step_profiles[t];
      for (int i = 0; i < n; ++i) {
        const auto& snap = tr.snapshots[t][i];
        if (t > 0) {
          const auto& prev = tr.snapshots[t - 1][i].actions;
          CHECK(std::includes(snap.actions.begin(), snap.actions.end(), prev.begin(), prev.end()));
        }
        std::vector<double> vals;
        for (Action j = 0; j < m; ++j) {
          const double u = oracle::linear_payoff(g, i, j, prof);
          const bool in = std::binary_search(snap.actions.begin(), snap.actions.end(), j);
          if (in) vals.push_back(u);
          if (!in && t > 0) CHECK(u < snap.mean + 1e-12);
        }
        CHECK(oracle::variance(vals) == doctest::Approx(snap.variance).epsilon(1e-9).scale(1.0));
      }
    }
    for (const auto& s : tr.steps) CHECK(s.linear_term <= 1e-12);
    CHECK(tr.terminal_variance < tr.terminal_bound + 1e-9);
  }
}

TEST_CASE("correct_m") {
  SUBCASE("no high-regret players leaves the profile alone") {
    const auto g = generate({.n = 20, .m = 3, .lambda = 0.05, .seed = 9});
    const auto w = ane_to_wsne_m(g, solved(g));
    auto r = purify_rounding_m(g, w);
    const auto out = correct_m(g, r.profile, r.trace);
    CHECK(r.trace.switched_players.empty());
    CHECK(out == r.profile);
  }
  SUBCASE("switch count and final regret") {
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 20;
      const int m = 3 + trial % 2;
      const auto g = generate({.n = n, .m = m, .lambda = 1.0 / n, .seed = 9100u + trial});
      const auto w = ane_to_wsne_m(g, solved(g));
      auto r = purify_rounding_m(g, w, {.trace = TraceLevel::kOff});
      const auto out = correct_m(g, r.profile, r.trace);
      const double l3m = std::log(3.0 * m);
      const double lambda = g.lambda();
      const double d1 = 4.0 * lambda * std::cbrt(double(n * n * m) * l3m);
      CHECK(double(r.trace.switched_players.size()) <=
            16.0 * n * n * lambda * lambda * m * l3m / (d1 * d1) + 1e-9);
      CHECK(oracle::pure_max_regret(g, out) <= 6.0 * lambda * std::cbrt(double(n * n * m) * l3m) + 1e-9);
    }
  }
}

TEST_CASE("purify dispatcher") {
  const auto g2 = generate({.n = 10, .m = 2, .lambda = 0.1, .seed = 1});
  const auto g3 = generate({.n = 10, .m = 3, .lambda = 0.1, .seed = 1});
  CHECK(purify(g2, solved(g2), PurifyMode::kAuto).mode == PurifyMode::kBinary);
  CHECK(purify(g3, solved(g3), PurifyMode::kAuto).mode == PurifyMode::kMAction);
  CHECK_THROWS_AS(purify(g3, solved(g3), PurifyMode::kBinary), UnsupportedOperation);

  for (int trial = 0; trial < 10; ++trial) {
    const int m = 2 + trial % 3;
    const auto g = generate({.n = 30, .m = m, .lambda = 1.0 / 30, .seed = 1200u + trial});
    const auto res = purify(g, solved(g), PurifyMode::kAuto, {.trace = TraceLevel::kOff});
    const double fresh = oracle::pure_max_regret(g, res.profile);
    CHECK(fresh == doctest::Approx(res.final_max_regret).epsilon(1e-12));
    CHECK(fresh <= res.regret_bound + 1e-9);
    CHECK(all_ok(trace_checks(res)));
  }
  CHECK(parse_purify_mode("m_action") == PurifyMode::kMAction);
  CHECK_THROWS_AS(parse_purify_mode("fast"), UsageError);
  CHECK(parse_trace_level("potentials") == TraceLevel::kPotentials);
}

TEST_CASE("determinism of traces") {
  const auto g = generate({.n = 25, .m = 3, .lambda = 0.04, .seed = 55});
  const auto p = solved(g);
  const auto a = purify(g, p, PurifyMode::kAuto);
  const auto b = purify(g, p, PurifyMode::kAuto);
  CHECK(a.profile == b.profile);
  const auto& ta = std::get<MActionPurifyTrace>(a.trace);
  const auto& tb = std::get<MActionPurifyTrace>(b.trace);
  CHECK(ta.variance == tb.variance);
  CHECK(ta.step_profiles == tb.step_profiles);
}

TEST_CASE("grow_relevant_set") {
  SUBCASE("adds the best outside action while it reaches the mean") {
    std::vector<Action> set = {0};
    const std::vector<double> u = {0.5, 0.2, 0.6, 0.55, 0.1};
    const auto adds = grow_relevant_set(set, u);
    // 0.6 >= 0.5, then 0.55 >= 0.55, then 0.2 < 0.55.
    REQUIRE(adds.size() == 2);
    CHECK(adds[0].action == 2);
    CHECK(adds[1].action == 3);
    CHECK(set == std::vector<Action>{0, 2, 3});
  }
  SUBCASE("ties go to the lowest index") {
    std::vector<Action> set = {2};
    const std::vector<double> u = {0.3, 0.4, 0.3, 0.4};
    const auto adds = grow_relevant_set(set, u);
    REQUIRE(adds.size() >= 1);
    CHECK(adds[0].action == 1);
  }
  SUBCASE("nothing to add") {
    std::vector<Action> set = {0, 1};
    const std::vector<double> u = {0.9, 0.8, 0.1};
    CHECK(grow_relevant_set(set, u).empty());
  }
  SUBCASE("postcondition and variance bookkeeping on random payoffs") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
      const int m = 2 + trial % 7;
      std::vector<double> u(static_cast<std::size_t>(m));
      for (double& x : u) x = unif(rng);
      std::vector<Action> set = {static_cast<Action>(trial % m)};
      const auto adds = grow_relevant_set(set, u);
      double mean = 0.0;
      std::vector<double> vals;
      for (Action j : set) vals.push_back(u[j]);
      for (double x : vals) mean += x;
      mean /= vals.size();
      for (Action j = 0; j < m; ++j) {
        if (!std::binary_search(set.begin(), set.end(), j)) CHECK(u[j] < mean);
      }
      double prev_mean = -1.0;
      for (const auto& a : adds) {
        CHECK(a.payoff >= a.mean_before);
        CHECK(a.mean_before >= prev_mean);
        prev_mean = a.mean_before;
        CHECK(a.variance_after - a.variance_before ==
              doctest::Approx(variance_addition_delta(a.size_before, a.mean_before,
                                                      a.variance_before, a.payoff))
                  .epsilon(1e-12)
                  .scale(1.0));
      }
      CHECK(oracle::variance(vals) ==
            doctest::Approx(adds.empty() ? 0.0 : adds.back().variance_after).epsilon(1e-12).scale(1.0));
    }
  }
  SUBCASE("empty start is rejected") {
    std::vector<Action> empty;
    const std::vector<double> u = {0.1, 0.2};
    CHECK_THROWS_AS(grow_relevant_set(empty, u), UsageError);
  }
}

TEST_CASE("property: relevant sets grow during rounding on tiered games") {
  int runs_with_growth = 0;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    const int n = 10, m = 3;
    const auto g = fixtures::tiered(n, m, 0.6 / n, 0.3, seed);
    const auto solved_profile = solve_mixed(g, default_solver_config(g));
    if (!solved_profile.converged) continue;
    const auto w = ane_to_wsne_m(g, solved_profile.profile);
    const auto r = purify_rounding_m(g, w);
    const auto& tr = r.trace;
    int additions = 0;
    for (const auto& s : tr.steps) additions += s.additions;
    if (additions == 0) continue;
    ++runs_with_growth;
    const double lambda = g.lambda();
    for (int t = 1; t <= n; ++t) {
      for (int i = 0; i < n; ++i) {
        std::vector<Action> set = tr.snapshots[t - 1][i].actions;
        std::vector<double> u(static_cast<std::size_t>(m));
        for (Action j = 0; j < m; ++j) u[j] = oracle::linear_payoff(g, i, j, tr.step_profiles[t]);
        const auto adds = grow_relevant_set(set, u);
        CHECK(set == tr.snapshots[t][i].actions);
        for (const auto& a : adds) {
          CHECK(std::abs(a.payoff - a.mean_before) <= 2.0 * lambda + 1e-12);
          const double k = a.size_before;
          CHECK(a.variance_after - a.variance_before <= 4.0 * k * lambda * lambda / ((k + 1) * (k + 1)) + 1e-12);
        }
      }
    }
    CHECK(tr.growth_total <= tr.growth_budget + 1e-9);
    CHECK(tr.terminal_variance < tr.terminal_bound + 1e-9);
  }
  CHECK(runs_with_growth >= 5);
}
