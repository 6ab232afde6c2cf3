#include "lippoly/harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "lippoly/errors.hpp"
#include "lippoly/evaluation.hpp"

namespace lippoly {

namespace {

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1p-53; }

std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  return std::mt19937_64(seq);
}

int exit_priority(int code) {
  switch (code) {
    case kExitFailure: return 4;
    case kExitWitness: return 3;
    case kExitBreach: return 2;
    case kExitNotConverged: return 1;
    default: return 0;
  }
}

Json checks_json(const std::vector<BoundCheck>& checks) {
  Json out = Json::array();
  for (const auto& c : checks) out.push_back(bound_check_to_json(c));
  return out;
}

void set_status(PipelineRecord& r, const std::string& status, int code) {
  r.status = status;
  r.exit_code = code;
}

}  // namespace

PlantedFault plant_lipschitz_fault(PolymatrixGame& game, std::uint64_t seed) {
  const int n = game.num_players(), m = game.num_actions();
  if (n < 2) throw UsageError("planting a fault needs at least two players");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pl(0, n - 1), act(0, m - 1);
  PlantedFault f;
  f.player = pl(rng);
  f.opponent = pl(rng);
  if (f.opponent == f.player) f.opponent = (f.player + 1) % n;
  f.action = act(rng);
  f.opponent_action = act(rng);
  f.original = game.at(f.player, f.opponent, f.action, f.opponent_action);
  f.planted = f.original + 2.0 * game.lambda();
  game.set_coefficient(f.player, f.opponent, f.action, f.opponent_action, f.planted);
  return f;
}

double existence_threshold(int n, int m, double lambda) {
  return lambda * std::sqrt(8.0 * n * std::log(2.0 * m * n));
}

BaselineReport sample_baseline(const GameView& game, const MixedProfile& mixed, int trials,
                               std::uint64_t seed) {
  const int n = game.num_players(), m = game.num_actions();
  if (trials < 1) throw UsageError("baseline needs at least one trial");
  mixed.validate(n, m);
  BaselineReport r;
  r.trials = trials;
  r.seed = seed;
  r.threshold = existence_threshold(n, m, game.lambda());
  r.input_max_regret = regret_report(game, mixed).max_regret;
  r.regrets.assign(static_cast<std::size_t>(trials), 0.0);

#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < trials; ++t) {
    auto rng = trial_rng(seed, static_cast<std::uint64_t>(t));
    PureProfile a(n, 0);
    for (int i = 0; i < n; ++i) {
      const double u = unit_uniform(rng);
      double acc = 0.0;
      Action pick = -1;
      for (int j = 0; j < m; ++j) {
        if (mixed(i, j) <= 0.0) continue;
        acc += mixed(i, j);
        pick = j;
        if (u < acc) break;
      }
      a[i] = pick;
    }
    r.regrets[static_cast<std::size_t>(t)] = regret_report(game, a).max_regret;
  }

  std::vector<double> sorted = r.regrets;
  std::sort(sorted.begin(), sorted.end());
  r.min = sorted.front();
  r.max = sorted.back();
  r.median = trials % 2 ? sorted[trials / 2] : 0.5 * (sorted[trials / 2 - 1] + sorted[trials / 2]);
  r.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / trials;
  const auto within = std::count_if(sorted.begin(), sorted.end(),
                                    [&](double x) { return x <= r.threshold + kTolerance; });
  r.fraction_within_threshold = static_cast<double>(within) / trials;
  return r;
}

Json baseline_to_json(const BaselineReport& r, bool include_regrets) {
  Json j;
  j["trials"] = r.trials;
  j["seed"] = r.seed;
  j["existence_threshold"] = r.threshold;
  j["input_max_regret"] = r.input_max_regret;
  j["min"] = r.min;
  j["median"] = r.median;
  j["mean"] = r.mean;
  j["max"] = r.max;
  j["fraction_within_threshold"] = r.fraction_within_threshold;
  if (include_regrets) j["regrets"] = r.regrets;
  return j;
}

PipelineRecord run_pipeline(const PolymatrixGame& game, const PipelineOptions& options,
                            const std::string& label) {
  PipelineRecord out;
  out.label = label;
  out.digest = game_digest(game);
  out.n = game.num_players();
  out.m = game.num_actions();
  out.lambda = game.lambda();
  Json& rec = out.record;
  rec["label"] = label;
  rec["digest"] = out.digest;
  rec["n"] = out.n;
  rec["m"] = out.m;
  rec["lambda"] = out.lambda;
  set_status(out, "ok", kExitOk);

  try {
    const auto check = check_game(game);
    rec["check"] = check_result_to_json(check);
    if (std::holds_alternative<LipschitzWitness>(check)) {
      set_status(out, "witness", kExitWitness);
    } else if (std::holds_alternative<RangeViolation>(check)) {
      set_status(out, "range_violation", kExitFailure);
    }
    if (out.status != "ok") {
      rec["status"] = out.status;
      rec["exit_code"] = out.exit_code;
      return out;
    }

    SolverConfig cfg = options.solver ? *options.solver : default_solver_config(game);
    if (!options.solver && !options.solver_overrides.is_null()) {
      cfg = solver_config_from_json(options.solver_overrides, cfg);
    }
    const auto solved = solve_mixed(game, cfg);
    Json solver = solve_result_to_json(solved);
    solver["target_epsilon"] = cfg.target_epsilon;
    rec["solver"] = solver;
    if (!solved.converged) set_status(out, "not_converged", kExitNotConverged);

    PurifyOptions popts;
    popts.trace = options.trace;
    try {
      const auto purified = purify(game, solved.profile, options.mode, popts);
      const double recomputed = regret_report(game, purified.profile).max_regret;
      Json p;
      p["mode"] = purify_mode_name(purified.mode);
      p["final_regret"] = recomputed;
      p["regret_bound"] = purified.regret_bound;
      p["bound_ratio"] = purified.regret_bound > 0 ? recomputed / purified.regret_bound : 0.0;
      p["reported_regret"] = purified.final_max_regret;
      Json trace = purify_result_to_json(purified)["trace"];
      p["trace"] = trace;
      rec["purify"] = p;
      if (std::abs(recomputed - purified.final_max_regret) > kTolerance ||
          recomputed > purified.regret_bound + kTolerance) {
        set_status(out, "breach", kExitBreach);
      }
      if (options.baseline_trials > 0) {
        auto b = baseline_to_json(sample_baseline(game, solved.profile, options.baseline_trials, options.seed));
        b["deterministic_regret"] = recomputed;
        rec["baseline"] = b;
      }
    } catch (const PreconditionViolation& e) {
      rec["purify"] = Json{{"error", "precondition"},
                           {"message", e.what()},
                           {"player", e.player() + 1},
                           {"regret", e.regret()},
                           {"required", e.required()}};
      set_status(out, "precondition", kExitNotConverged);
    } catch (const InvariantBreach& e) {
      rec["purify"] = Json{{"error", "breach"}, {"message", e.what()}, {"checks", checks_json(e.checks())}};
      set_status(out, "breach", kExitBreach);
    }

    if (options.reduce) {
      ReductionOptions ropts;
      ropts.view = options.reduce->view;
      ropts.purify_mode = options.mode;
      try {
        const auto red = reduce_and_solve(game, options.reduce->epsilon, options.reduce->L, ropts);
        rec["reduce"] = reduction_report_to_json(red.report);
        if (red.report.aggregated_regret > red.report.purified_regret + kTolerance) {
          set_status(out, "breach", kExitBreach);
        }
      } catch (const InvariantBreach& e) {
        rec["reduce"] = Json{{"error", "breach"}, {"message", e.what()}, {"checks", checks_json(e.checks())}};
        set_status(out, "breach", kExitBreach);
      } catch (const PreconditionViolation& e) {
        rec["reduce"] = Json{{"error", "precondition"}, {"message", e.what()}};
        if (exit_priority(kExitNotConverged) > exit_priority(out.exit_code)) {
          set_status(out, "precondition", kExitNotConverged);
        }
      } catch (const CapacityError& e) {
        rec["reduce"] = Json{{"error", "capacity"}, {"message", e.what()}, {"estimate", e.estimate()}, {"limit", e.limit()}};
        set_status(out, "error", kExitFailure);
      }
    }
  } catch (const std::exception& e) {
    rec["error"] = e.what();
    set_status(out, "error", kExitFailure);
  }
  rec["status"] = out.status;
  rec["exit_code"] = out.exit_code;
  return out;
}

int combine_exit_codes(const std::vector<PipelineRecord>& records) {
  int code = kExitOk;
  for (const auto& r : records)
    if (exit_priority(r.exit_code) > exit_priority(code)) code = r.exit_code;
  return code;
}

Json quantiles(std::vector<double> xs) {
  if (xs.empty()) return Json{{"count", 0}};
  std::sort(xs.begin(), xs.end());
  auto at = [&](double q) {
    const double pos = q * (xs.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, xs.size() - 1);
    return xs[lo] + (pos - lo) * (xs[hi] - xs[lo]);
  };
  return Json{{"count", xs.size()},
              {"min", xs.front()},
              {"p50", at(0.5)},
              {"p90", at(0.9)},
              {"max", xs.back()},
              {"mean", std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size()}};
}

Json aggregate_records(const std::vector<PipelineRecord>& records) {
  std::map<std::string, int> by_status;
  std::vector<double> regrets, ratios, solver_regrets;
  for (const auto& r : records) {
    ++by_status[r.status];
    const auto& rec = r.record;
    if (rec.contains("solver")) solver_regrets.push_back(rec["solver"]["achieved_max_regret"].get<double>());
    if (rec.contains("purify") && rec["purify"].contains("final_regret")) {
      regrets.push_back(rec["purify"]["final_regret"].get<double>());
      ratios.push_back(rec["purify"]["bound_ratio"].get<double>());
    }
  }
  Json j;
  j["instances"] = records.size();
  Json status = Json::object();
  for (const auto& [k, v] : by_status) status[k] = v;
  j["status"] = status;
  j["exit_code"] = combine_exit_codes(records);
  j["solver_regret"] = quantiles(solver_regrets);
  j["final_regret"] = quantiles(regrets);
  j["bound_ratio"] = quantiles(ratios);
  return j;
}

std::string records_to_csv(const std::vector<PipelineRecord>& records) {
  std::ostringstream os;
  os.precision(17);
  os << "label,digest,n,m,lambda,status,exit_code,solver_regret,mode,final_regret,regret_bound,bound_ratio,"
        "baseline_min,existence_threshold\n";
  for (const auto& r : records) {
    const auto& rec = r.record;
    const auto num = [&](const Json& parent, const char* key) -> std::string {
      if (!parent.is_object() || !parent.contains(key)) return "";
      std::ostringstream v;
      v.precision(17);
      v << parent[key].get<double>();
      return v.str();
    };
    const Json none = Json::object();
    const Json& solver = rec.contains("solver") ? rec["solver"] : none;
    const Json& p = rec.contains("purify") ? rec["purify"] : none;
    const Json& b = rec.contains("baseline") ? rec["baseline"] : none;
    os << r.label << ',' << r.digest << ',' << r.n << ',' << r.m << ',' << r.lambda << ',' << r.status << ','
       << r.exit_code << ',' << num(solver, "achieved_max_regret") << ','
       << (p.contains("mode") ? p["mode"].get<std::string>() : "") << ',' << num(p, "final_regret") << ','
       << num(p, "regret_bound") << ',' << num(p, "bound_ratio") << ',' << num(b, "min") << ','
       << num(b, "existence_threshold") << '\n';
  }
  return os.str();
}

std::vector<PipelineRecord> run_ensemble(const GeneratorSpec& base, int count,
                                         const PipelineOptions& options) {
  if (count < 1) throw UsageError("ensemble needs at least one instance");
  std::vector<PipelineRecord> records(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < count; ++k) {
    GeneratorSpec spec = base;
    spec.seed = base.seed + static_cast<std::uint64_t>(k);
    const std::string label = family_name(spec.family) + "-n" + std::to_string(spec.n) + "-m" +
                              std::to_string(spec.m) + "-s" + std::to_string(spec.seed);
    try {
      records[k] = run_pipeline(generate(spec), options, label);
    } catch (const std::exception& e) {
      PipelineRecord r;
      r.label = label;
      r.status = "error";
      r.exit_code = kExitFailure;
      r.record = Json{{"label", label}, {"error", e.what()}, {"status", "error"}, {"exit_code", kExitFailure}};
      records[k] = std::move(r);
    }
  }
  return records;
}

}  // namespace lippoly
