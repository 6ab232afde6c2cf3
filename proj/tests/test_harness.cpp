#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "lippoly/errors.hpp"
#include "lippoly/evaluation.hpp"
#include "lippoly/harness.hpp"
#include "oracles.hpp"

using namespace lippoly;

TEST_CASE("existence threshold") {
  CHECK(existence_threshold(50, 2, 0.02) == doctest::Approx(0.02 * std::sqrt(400.0 * std::log(200.0))));
}

TEST_CASE("baseline on a pure-valued profile repeats the input") {
  const auto g = generate({.n = 8, .m = 3, .lambda = 0.125, .seed = 1});
  std::mt19937_64 rng(1);
  const auto a = oracle::random_pure(8, 3, rng);
  const auto r = sample_baseline(g, MixedProfile::from_pure(a, 3), 50, 7);
  const double want = oracle::pure_max_regret(g, a);
  for (double x : r.regrets) CHECK(x == doctest::Approx(want).epsilon(1e-12));
  CHECK(r.input_max_regret == doctest::Approx(want).epsilon(1e-12));
  CHECK(r.min == r.max);
}

TEST_CASE("baseline on the zero game") {
  const PolymatrixGame g(5, 2, 0.2);
  const auto r = sample_baseline(g, MixedProfile::uniform(5, 2), 30, 0);
  CHECK(r.max == 0.0);
  CHECK(r.fraction_within_threshold == 1.0);
}

TEST_CASE("baseline samples follow the profile and are reproducible") {
  const auto g = generate({.n = 10, .m = 2, .lambda = 0.1, .seed = 2});
  MixedProfile p(10, 2);
  for (int i = 0; i < 10; ++i) {
    p(i, 0) = i % 2 ? 1.0 : 0.5;
    p(i, 1) = 1.0 - p(i, 0);
  }
  const auto a = sample_baseline(g, p, 200, 11);
  const auto b = sample_baseline(g, p, 200, 11);
  CHECK(a.regrets == b.regrets);
  const auto c = sample_baseline(g, p, 200, 12);
  CHECK(a.regrets != c.regrets);
  CHECK(a.min <= a.median);
  CHECK(a.median <= a.max);
  CHECK_THROWS_AS(sample_baseline(g, p, 0, 0), UsageError);
}

TEST_CASE("planted fault short-circuits the pipeline") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto g = generate({.n = 6, .m = 2, .lambda = 1.0 / 6, .seed = seed});
    const auto f = plant_lipschitz_fault(g, seed);
    CHECK(f.planted == doctest::Approx(f.original + 2.0 / 6));
    const auto r = run_pipeline(g, {});
    CHECK(r.status == "witness");
    CHECK(r.exit_code == kExitWitness);
    CHECK_FALSE(r.record.contains("solver"));
    CHECK(r.record["check"]["player"] == f.player + 1);
  }
}

TEST_CASE("valid instance reports a regret within the mode bound") {
  const auto g = generate({.n = 20, .m = 2, .lambda = 0.05, .seed = 4});
  PipelineOptions opts;
  opts.baseline_trials = 20;
  const auto r = run_pipeline(g, opts, "x");
  REQUIRE(r.status == "ok");
  CHECK(r.exit_code == kExitOk);
  const auto& p = r.record["purify"];
  CHECK(p["mode"] == "binary");
  CHECK(p["final_regret"].get<double>() <= p["regret_bound"].get<double>());
  const auto pure = std::get<PureProfile>(profile_from_json(
      Json{{"pure", p["trace"]["final_profile"]}}, 20, 2));
  CHECK(oracle::pure_max_regret(g, pure) == doctest::Approx(p["final_regret"].get<double>()).epsilon(1e-9));
  CHECK(r.record.contains("baseline"));
}

TEST_CASE("explicit m_action mode on a binary game is honoured") {
  const auto g = generate({.n = 20, .m = 2, .lambda = 0.05, .seed = 5});
  PipelineOptions opts;
  opts.mode = PurifyMode::kMAction;
  const auto r = run_pipeline(g, opts);
  CHECK(r.record["purify"]["mode"] == "m_action");
  CHECK(r.record["purify"]["trace"]["path"] == "m_action");
}

TEST_CASE("range violation is a validation failure") {
  PolymatrixGame g(2, 2, 1.0);
  g.set_block(0, 1, std::vector<double>{1.5, 1.5, 1.5, 1.5});
  const auto r = run_pipeline(g, {});
  CHECK(r.status == "range_violation");
  CHECK(r.exit_code == kExitFailure);
}

TEST_CASE("ensemble reports are byte-identical for identical seeds") {
  GeneratorSpec spec{.n = 12, .m = 3, .lambda = 1.0 / 12, .seed = 100};
  PipelineOptions opts;
  opts.trace = TraceLevel::kPotentials;
  opts.baseline_trials = 10;
  const auto a = run_ensemble(spec, 4, opts);
  const auto b = run_ensemble(spec, 4, opts);
  REQUIRE(a.size() == 4);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k].record.dump() == b[k].record.dump());
  CHECK(aggregate_records(a).dump() == aggregate_records(b).dump());
  CHECK(records_to_csv(a) == records_to_csv(b));
}

TEST_CASE("exit code priority") {
  auto rec = [](int code) {
    PipelineRecord r;
    r.exit_code = code;
    return r;
  };
  CHECK(combine_exit_codes({rec(0), rec(20)}) == 20);
  CHECK(combine_exit_codes({rec(20), rec(30)}) == 30);
  CHECK(combine_exit_codes({rec(30), rec(10)}) == 10);
  CHECK(combine_exit_codes({rec(10), rec(1)}) == 1);
  CHECK(combine_exit_codes({}) == 0);
}

TEST_CASE("quantiles") {
  const auto q = quantiles({4.0, 1.0, 3.0, 2.0, 5.0});
  CHECK(q["min"] == 1.0);
  CHECK(q["p50"] == 3.0);
  CHECK(q["p90"].get<double>() == doctest::Approx(4.6));
  CHECK(q["max"] == 5.0);
  CHECK(q["mean"] == 3.0);
  CHECK(quantiles({})["count"] == 0);
}

TEST_CASE("pipeline with reduction") {
  const auto g = generate({.n = 3, .m = 2, .lambda = 0.3, .seed = 8});
  PipelineOptions opts;
  opts.reduce = ReduceStage{0.5, 10, ViewMode::kLazy};
  const auto r = run_pipeline(g, opts);
  REQUIRE(r.record.contains("reduce"));
  CHECK(r.record["reduce"]["L"] == 10);
  CHECK(r.record["reduce"]["aggregated_regret"].get<double>() <=
        r.record["reduce"]["population_regret"].get<double>() + 1e-9);
}
