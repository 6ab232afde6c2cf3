// lippoly: command-line front end.
//
// Exit codes: 0 ok, 1 usage/IO/validation failure, 10 Lipschitz witness
// found, 20 solver did not converge, 30 bound breach.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lippoly/errors.hpp"
#include "lippoly/evaluation.hpp"
#include "lippoly/harness.hpp"
#include "lippoly/io.hpp"

using namespace lippoly;

namespace {

struct Common {
  int n = 10;
  int m = 2;
  double lambda = -1.0;  // < 0: 1/n
  std::string family = "uniform_coefficients";
  double density = 0.5;
  double weight = 0.5;
  std::uint64_t seed = 0;
  std::string out;
  std::string mode;
  std::string trace = "off";
  std::string config;
  std::string profile;
  std::vector<std::string> games;
  double eps = -1.0;
  int L = 0;
  int trials = 0;
  int instances = 1;
  bool plant = false;
  std::string csv;
  std::string aggregate;
};

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text_file(path, text);
  }
}

void emit_json(const std::string& path, const Json& j) { emit(path, j.dump(2) + "\n"); }

std::optional<SolverConfig> solver_config(const Common& c, const GameView& game) {
  if (c.config.empty() && c.eps < 0 && c.seed == 0) return std::nullopt;
  SolverConfig cfg = default_solver_config(game);
  if (!c.config.empty()) {
    const Json j = read_json_file(c.config);
    try {
      cfg = solver_config_from_json(j.contains("solver") ? j["solver"] : j, cfg);
    } catch (const ValidationError& e) {
      throw ValidationError(c.config + ": " + e.what());
    }
  }
  if (c.eps > 0) cfg.target_epsilon = c.eps;
  if (c.seed != 0) cfg.seed = c.seed;
  return cfg;
}

Profile load_profile(const std::string& path, const PolymatrixGame& g) {
  const Json j = read_json_file(path);
  try {
    // Accept the output of `solve` / `purify` as well as a bare profile.
    return profile_from_json(j.contains("profile") ? j["profile"] : j, g.num_players(), g.num_actions());
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

GeneratorSpec generator_spec(const Common& c) {
  GeneratorSpec s;
  s.n = c.n;
  s.m = c.m;
  s.lambda = c.lambda > 0 ? c.lambda : 1.0 / c.n;
  s.family = parse_family(c.family);
  s.density = c.density;
  s.weight = c.weight;
  s.seed = c.seed;
  return s;
}

int cmd_generate(const Common& c) {
  auto g = generate(generator_spec(c));
  if (c.plant) plant_lipschitz_fault(g, c.seed);
  emit_json(c.out, game_to_json(g));
  return kExitOk;
}

int cmd_check(const Common& c) {
  const auto g = read_game_file(c.games.at(0));
  const auto r = check_game(g);
  emit_json(c.out, check_result_to_json(r));
  if (std::holds_alternative<LipschitzWitness>(r)) return kExitWitness;
  if (std::holds_alternative<RangeViolation>(r)) return kExitFailure;
  return kExitOk;
}

int cmd_solve(const Common& c) {
  const auto g = read_game_file(c.games.at(0));
  const auto cfg = solver_config(c, g).value_or(default_solver_config(g));
  const auto r = solve_mixed(g, cfg);
  Json j;
  j["digest"] = game_digest(g);
  j["solver"] = solve_result_to_json(r);
  j["config"] = solver_config_to_json(cfg);
  j["profile"] = profile_to_json(r.profile);
  emit_json(c.out, j);
  return r.converged ? kExitOk : kExitNotConverged;
}

int cmd_purify(const Common& c) {
  const auto g = read_game_file(c.games.at(0));
  if (c.profile.empty()) throw UsageError("purify needs --profile");
  const auto input = as_mixed(load_profile(c.profile, g), g.num_actions());
  PurifyOptions opts;
  opts.trace = parse_trace_level(c.trace);
  const PurifyMode mode = c.mode.empty() ? PurifyMode::kAuto : parse_purify_mode(c.mode);
  try {
    const auto result = purify(g, input, mode, opts);
    Json j = purify_result_to_json(result);
    j["digest"] = game_digest(g);
    j["final_regret"] = regret_report(g, result.profile).max_regret;
    emit_json(c.out, j);
    return kExitOk;
  } catch (const InvariantBreach& e) {
    Json checks = Json::array();
    for (const auto& b : e.checks()) checks.push_back(bound_check_to_json(b));
    emit_json(c.out, Json{{"error", "breach"}, {"message", e.what()}, {"checks", checks}});
    return kExitBreach;
  } catch (const PreconditionViolation& e) {
    emit_json(c.out, Json{{"error", "precondition"},
                          {"message", e.what()},
                          {"player", e.player() + 1},
                          {"regret", e.regret()},
                          {"required", e.required()}});
    return kExitNotConverged;
  }
}

int cmd_reduce(const Common& c) {
  const auto g = read_game_file(c.games.at(0));
  if (c.eps <= 0) throw UsageError("reduce needs --eps > 0");
  if (c.L < 1) throw UsageError("reduce needs --L >= 1");
  ReductionOptions opts;
  opts.view = c.mode.empty() ? ViewMode::kLazy : parse_view_mode(c.mode);
  opts.trace = parse_trace_level(c.trace);
  try {
    const auto r = reduce_and_solve(g, c.eps, c.L, opts);
    Json j = reduction_report_to_json(r.report);
    j["digest"] = game_digest(g);
    j["profile"] = profile_to_json(r.profile);
    if (opts.trace != TraceLevel::kOff) j["trace"] = purify_result_to_json(r.purification)["trace"];
    emit_json(c.out, j);
    return kExitOk;
  } catch (const CapacityError& e) {
    std::cerr << "lippoly: " << e.what() << "\n";
    return kExitFailure;
  } catch (const InvariantBreach& e) {
    std::cerr << "lippoly: " << e.what() << "\n";
    return kExitBreach;
  }
}

int cmd_baseline(const Common& c) {
  const auto g = read_game_file(c.games.at(0));
  MixedProfile mixed;
  const auto cfg = solver_config(c, g).value_or(default_solver_config(g));
  if (!c.profile.empty()) {
    mixed = as_mixed(load_profile(c.profile, g), g.num_actions());
  } else {
    mixed = solve_mixed(g, cfg).profile;
  }
  const int trials = c.trials > 0 ? c.trials : 1000;
  Json j = baseline_to_json(sample_baseline(g, mixed, trials, c.seed));
  j["digest"] = game_digest(g);
  try {
    PurifyOptions opts;
    opts.trace = TraceLevel::kOff;
    const auto r = purify(g, mixed, c.mode.empty() ? PurifyMode::kAuto : parse_purify_mode(c.mode), opts);
    j["deterministic_regret"] = regret_report(g, r.profile).max_regret;
    j["deterministic_bound"] = r.regret_bound;
  } catch (const std::exception& e) {
    j["deterministic_error"] = e.what();
  }
  emit_json(c.out, j);
  return kExitOk;
}

int cmd_pipeline(const Common& c) {
  PipelineOptions opts;
  opts.mode = c.mode.empty() ? PurifyMode::kAuto : parse_purify_mode(c.mode);
  opts.trace = parse_trace_level(c.trace);
  opts.baseline_trials = c.trials;
  opts.seed = c.seed;
  if (c.L > 0) {
    if (c.eps <= 0) throw UsageError("--L needs --eps > 0");
    opts.reduce = ReduceStage{c.eps, c.L, ViewMode::kLazy};
  }
  if (!c.config.empty()) {
    const Json j = read_json_file(c.config);
    opts.solver_overrides = j.contains("solver") ? j["solver"] : j;
    // Fail early on unknown keys rather than once per instance.
    try {
      solver_config_from_json(opts.solver_overrides, default_solver_config(PolymatrixGame(2, 2, 1.0)));
    } catch (const ValidationError& e) {
      throw ValidationError(c.config + ": " + e.what());
    }
  }

  std::vector<PipelineRecord> records;
  if (!c.games.empty()) {
    for (const auto& path : c.games) records.push_back(run_pipeline(read_game_file(path), opts, path));
  } else {
    records = run_ensemble(generator_spec(c), c.instances, opts);
  }

  std::string lines;
  for (const auto& r : records) lines += r.record.dump() + "\n";
  emit(c.out, lines);
  const Json agg = aggregate_records(records);
  if (!c.aggregate.empty()) {
    emit_json(c.aggregate, agg);
  } else if (!c.out.empty() && c.out != "-") {
    emit_json(c.out + ".aggregate.json", agg);
  } else {
    std::cerr << agg.dump(2) << "\n";
  }
  if (!c.csv.empty()) write_text_file(c.csv, records_to_csv(records));
  return combine_exit_codes(records);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pure approximate equilibria of Lipschitz polymatrix games"};
  app.require_subcommand(1);
  Common c;

  auto add_generator = [&](CLI::App* s) {
    s->add_option("--n", c.n, "players")->check(CLI::PositiveNumber);
    s->add_option("--m", c.m, "actions per player")->check(CLI::Range(2, 1 << 20));
    s->add_option("--lambda", c.lambda, "Lipschitz parameter (default 1/n)");
    s->add_option("--family", c.family, "uniform_coefficients | sparse | coordination_mix");
    s->add_option("--density", c.density, "sparse family: block density");
    s->add_option("--weight", c.weight, "coordination_mix family: identity weight");
    s->add_option("--seed", c.seed, "random seed");
  };
  auto add_game = [&](CLI::App* s) { s->add_option("game", c.games, "game JSON file")->required()->expected(1); };

  auto* gen = app.add_subcommand("generate", "write a random valid game");
  add_generator(gen);
  gen->add_flag("--plant", c.plant, "raise one coefficient by 2*lambda to break the Lipschitz property");
  gen->add_option("--out", c.out, "output file (default stdout)");

  auto* check = app.add_subcommand("check", "validate a game or produce a witness");
  add_game(check);
  check->add_option("--out", c.out);

  auto* solve = app.add_subcommand("solve", "approximate mixed equilibrium");
  add_game(solve);
  solve->add_option("--eps", c.eps, "target max regret (default lambda/8 or ((m-1)/m)^2 lambda)");
  solve->add_option("--seed", c.seed, "starting-profile seed");
  solve->add_option("--config", c.config, "solver config JSON sidecar");
  solve->add_option("--out", c.out);

  auto* pur = app.add_subcommand("purify", "round a mixed profile to a pure approximate equilibrium");
  add_game(pur);
  pur->add_option("--profile", c.profile, "profile JSON (bare or solve output)")->required();
  pur->add_option("--mode", c.mode, "binary | m_action | auto");
  pur->add_option("--trace", c.trace, "full | potentials | off");
  pur->add_option("--out", c.out);

  auto* red = app.add_subcommand("reduce", "solve through the population game g_G(L)");
  add_game(red);
  red->add_option("--eps", c.eps, "target regret in the base game")->required();
  red->add_option("--L", c.L, "replicas per player")->required();
  red->add_option("--mode", c.mode, "lazy | materialized");
  red->add_option("--trace", c.trace, "full | potentials | off");
  red->add_option("--out", c.out);

  auto* base = app.add_subcommand("baseline", "sample pure profiles from a mixed equilibrium");
  add_game(base);
  base->add_option("--profile", c.profile, "profile JSON (default: solve first)");
  base->add_option("--trials", c.trials, "samples (default 1000)");
  base->add_option("--seed", c.seed, "sampling seed");
  base->add_option("--mode", c.mode, "purifier mode for the comparison");
  base->add_option("--out", c.out);

  auto* pipe = app.add_subcommand("pipeline", "check, solve, purify and report");
  pipe->add_option("game", c.games, "game JSON files (default: generated ensemble)");
  add_generator(pipe);
  pipe->add_option("--instances", c.instances, "generated instances, seeds seed..seed+instances-1")
      ->check(CLI::PositiveNumber);
  pipe->add_option("--mode", c.mode, "binary | m_action | auto");
  pipe->add_option("--trace", c.trace, "full | potentials | off");
  pipe->add_option("--trials", c.trials, "baseline samples per instance (0 skips)");
  pipe->add_option("--eps", c.eps, "reduction target regret");
  pipe->add_option("--L", c.L, "run the population reduction with this L");
  pipe->add_option("--config", c.config, "solver config JSON sidecar");
  pipe->add_option("--out", c.out, "JSON-lines output (aggregate goes to <out>.aggregate.json)");
  pipe->add_option("--aggregate", c.aggregate, "aggregate JSON output");
  pipe->add_option("--csv", c.csv, "CSV output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitFailure;
  }

  try {
    if (*gen) return cmd_generate(c);
    if (*check) return cmd_check(c);
    if (*solve) return cmd_solve(c);
    if (*pur) return cmd_purify(c);
    if (*red) return cmd_reduce(c);
    if (*base) return cmd_baseline(c);
    if (*pipe) return cmd_pipeline(c);
  } catch (const std::exception& e) {
    std::cerr << "lippoly: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
