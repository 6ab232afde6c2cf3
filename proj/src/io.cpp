#include "lippoly/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "lippoly/errors.hpp"

namespace lippoly {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ValidationError(path + ": " + msg);
}

const Json& require(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) fail(path, std::string("missing key '") + key + "'");
  return *it;
}

int read_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  const auto v = j.get<std::int64_t>();
  if (v < INT32_MIN || v > INT32_MAX) fail(path, "integer out of range");
  return static_cast<int>(v);
}

double read_double(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

// Wire index in [1, limit] to 0-based.
int read_index(const Json& j, int limit, const std::string& path) {
  const int v = read_int(j, path);
  if (v < 1 || v > limit) fail(path, "index " + std::to_string(v) + " outside [1, " + std::to_string(limit) + "]");
  return v - 1;
}

Json one_based(const std::vector<int>& xs) {
  Json out = Json::array();
  for (int x : xs) out.push_back(x + 1);
  return out;
}

Json rows_to_json(const MixedProfile& p) {
  Json rows = Json::array();
  for (int i = 0; i < p.num_players(); ++i) {
    const auto r = p.row(i);
    rows.push_back(Json(std::vector<double>(r.begin(), r.end())));
  }
  return rows;
}

Json checks_to_json(const std::vector<BoundCheck>& checks) {
  Json out = Json::array();
  for (const auto& c : checks) out.push_back(bound_check_to_json(c));
  return out;
}

bool any_breach(const std::vector<BoundCheck>& checks) {
  for (const auto& c : checks)
    if (!c.ok) return true;
  return false;
}

Json binary_trace_to_json(const BinaryPurifyTrace& t) {
  Json j;
  j["path"] = "binary";
  j["trace_level"] = trace_level_name(t.level);
  j["n"] = t.n;
  j["lambda"] = t.lambda;
  j["thresholds"] = {{"epsilon0", t.epsilon0},   {"wsne_bound", t.wsne_bound},
                     {"cost_bound", t.cost_bound}, {"delta", t.delta},
                     {"regret_bound", t.regret_bound}};
  j["order"] = one_based(t.order);
  j["input_max_regret"] = t.input_max_regret;
  j["precondition_relaxed"] = t.precondition_relaxed;
  j["step1_switched"] = one_based(t.step1_switched);
  j["wsne_support_regret"] = t.wsne_support_regret;
  if (t.level == TraceLevel::kFull) {
    j["input_profile"] = rows_to_json(t.input_profile);
    j["wsne_profile"] = rows_to_json(t.wsne_profile);
    Json sets = Json::array();
    for (const auto& s : t.relevant_sets) sets.push_back(one_based(s));
    j["relevant_sets"] = sets;
    Json profiles = Json::array();
    for (const auto& p : t.step_profiles) profiles.push_back(rows_to_json(p));
    j["step_profiles"] = profiles;
  }
  if (t.level != TraceLevel::kOff) {
    j["cost"] = t.cost;
    Json steps = Json::array();
    for (const auto& s : t.steps) {
      Json e;
      e["step"] = s.step;
      e["player"] = s.player + 1;
      e["was_mixed"] = s.was_mixed;
      e["chosen_action"] = s.p_after >= 0.5 ? 2 : 1;
      e["p_before"] = s.p_before;
      e["p_after"] = s.p_after;
      e["coefficient"] = s.coefficient;
      e["potential"] = s.cost;
      e["potential_increase"] = s.cost_increase;
      e["potential_increase_bound"] = s.cost_increase_bound;
      e["breach"] = s.cost_increase > s.cost_increase_bound + kTolerance;
      e["new_members"] = one_based(s.new_members);
      steps.push_back(e);
    }
    j["steps"] = steps;
  }
  j["terminal_cost"] = t.terminal_cost;
  j["terminal_relevant_size"] = t.terminal_relevant_size;
  j["rounded_profile"] = one_based(t.rounded_profile.actions);
  j["step3_switched"] = one_based(t.switched_players);
  j["final_profile"] = one_based(t.final_profile.actions);
  j["final_max_regret"] = t.final_max_regret;
  j["warnings"] = t.warnings;
  j["checks"] = checks_to_json(t.checks);
  j["breach"] = any_breach(t.checks);
  return j;
}

Json snapshot_to_json(const RelevantSnapshot& s) {
  return Json{{"actions", one_based(s.actions)},
              {"payoffs", s.payoffs},
              {"mean", s.mean},
              {"variance", s.variance}};
}

Json m_trace_to_json(const MActionPurifyTrace& t) {
  Json j;
  j["path"] = "m_action";
  j["trace_level"] = trace_level_name(t.level);
  j["n"] = t.n;
  j["m"] = t.m;
  j["lambda"] = t.lambda;
  j["thresholds"] = {{"epsilon0", t.epsilon0},
                     {"delta0", t.delta0},
                     {"epsilon1", t.epsilon1},
                     {"delta1", t.delta1},
                     {"initial_budget", t.initial_budget},
                     {"growth_budget", t.growth_budget},
                     {"step_budget", t.step_budget},
                     {"terminal_bound", t.terminal_bound},
                     {"switch_bound", t.switch_bound},
                     {"regret_bound", t.regret_bound}};
  j["order"] = one_based(t.order);
  j["input_max_regret"] = t.input_max_regret;
  j["precondition_relaxed"] = t.precondition_relaxed;
  j["step1_switched"] = one_based(t.step1_switched);
  j["wsne_support_regret"] = t.wsne_support_regret;
  if (t.level == TraceLevel::kFull) {
    j["input_profile"] = rows_to_json(t.input_profile);
    j["wsne_profile"] = rows_to_json(t.wsne_profile);
    Json profiles = Json::array();
    for (const auto& p : t.step_profiles) profiles.push_back(rows_to_json(p));
    j["step_profiles"] = profiles;
    Json snaps = Json::array();
    for (const auto& row : t.snapshots) {
      Json r = Json::array();
      for (const auto& s : row) r.push_back(snapshot_to_json(s));
      snaps.push_back(r);
    }
    j["relevant_sets"] = snaps;
  }
  if (t.level != TraceLevel::kOff) {
    j["relevant_sizes"] = t.relevant_sizes;
    j["variance"] = t.variance;
    Json steps = Json::array();
    for (const auto& s : t.steps) {
      Json e;
      e["step"] = s.step;
      e["player"] = s.player + 1;
      e["was_pure"] = s.was_pure;
      e["chosen_action"] = s.chosen + 1;
      e["b"] = s.b;
      e["linear_term"] = s.linear_term;
      e["potential_before"] = s.variance_before;
      e["potential_after_move"] = s.variance_after_move;
      e["potential"] = s.variance_after;
      e["additions"] = s.additions;
      e["breach"] = s.linear_term > 1e-12;
      steps.push_back(e);
    }
    j["steps"] = steps;
  }
  j["initial_variance"] = t.initial_variance;
  j["growth_total"] = t.growth_total;
  j["step_total"] = t.step_total;
  j["terminal_variance"] = t.terminal_variance;
  j["rounded_profile"] = one_based(t.rounded_profile.actions);
  j["step3_switched"] = one_based(t.switched_players);
  j["final_profile"] = one_based(t.final_profile.actions);
  j["final_max_regret"] = t.final_max_regret;
  j["warnings"] = t.warnings;
  j["checks"] = checks_to_json(t.checks);
  j["breach"] = any_breach(t.checks);
  return j;
}

}  // namespace

Json game_to_json(const PolymatrixGame& game) {
  const int n = game.num_players(), m = game.num_actions();
  Json j;
  j["n"] = n;
  j["m"] = m;
  j["lambda"] = game.lambda();
  Json beta = Json::array();
  for (int i = 0; i < n; ++i) {
    for (int ip = 0; ip < n; ++ip) {
      if (i == ip) continue;
      const auto block = game.block(i, ip);
      bool zero = true;
      for (double x : block) zero = zero && x == 0.0;
      if (zero) continue;
      Json matrix = Json::array();
      for (int r = 0; r < m; ++r) {
        matrix.push_back(Json(std::vector<double>(block.begin() + r * m, block.begin() + (r + 1) * m)));
      }
      beta.push_back(Json{{"i", i + 1}, {"ip", ip + 1}, {"matrix", matrix}});
    }
  }
  j["beta"] = beta;
  return j;
}

PolymatrixGame game_from_json(const Json& j) {
  const int n = read_int(require(j, "n", "game"), "n");
  const int m = read_int(require(j, "m", "game"), "m");
  const double lambda = read_double(require(j, "lambda", "game"), "lambda");
  if (n < 1) fail("n", "must be >= 1");
  if (m < 2) fail("m", "must be >= 2");
  if (!(lambda > 0.0 && lambda <= 1.0)) fail("lambda", "must lie in (0, 1]");
  PolymatrixGame game(n, m, lambda);
  const auto it = j.find("beta");
  if (it == j.end()) return game;
  if (!it->is_array()) fail("beta", "expected an array");
  std::set<std::pair<int, int>> seen;
  std::vector<double> block(static_cast<std::size_t>(m) * m);
  for (std::size_t k = 0; k < it->size(); ++k) {
    const std::string at = "beta[" + std::to_string(k) + "]";
    const Json& e = (*it)[k];
    const int i = read_index(require(e, "i", at), n, at + ".i");
    const int ip = read_index(require(e, "ip", at), n, at + ".ip");
    if (!seen.insert({i, ip}).second) fail(at, "duplicate block for this (i, ip)");
    const Json& matrix = require(e, "matrix", at);
    const std::string mat = at + ".matrix";
    if (!matrix.is_array() || static_cast<int>(matrix.size()) != m) fail(mat, "expected " + std::to_string(m) + " rows");
    for (int r = 0; r < m; ++r) {
      const std::string row = mat + "[" + std::to_string(r) + "]";
      if (!matrix[r].is_array() || static_cast<int>(matrix[r].size()) != m)
        fail(row, "expected " + std::to_string(m) + " entries");
      for (int c = 0; c < m; ++c) block[static_cast<std::size_t>(r) * m + c] = read_double(matrix[r][c], row + "[" + std::to_string(c) + "]");
    }
    if (i == ip) {
      for (double x : block)
        if (x != 0.0) fail(at, "a player's block against themselves must be zero");
      continue;
    }
    game.set_block(i, ip, block);
  }
  return game;
}

Json profile_to_json(const PureProfile& a) { return Json{{"pure", one_based(a.actions)}}; }

Json profile_to_json(const MixedProfile& p) { return Json{{"mixed", rows_to_json(p)}}; }

Profile profile_from_json(const Json& j, int n, int m) {
  if (!j.is_object()) fail("profile", "expected an object");
  const bool has_pure = j.contains("pure"), has_mixed = j.contains("mixed");
  if (has_pure == has_mixed) fail("profile", "expected exactly one of 'pure' or 'mixed'");
  if (has_pure) {
    const Json& arr = j["pure"];
    if (!arr.is_array() || static_cast<int>(arr.size()) != n) fail("pure", "expected " + std::to_string(n) + " actions");
    PureProfile a(n, 0);
    for (int i = 0; i < n; ++i) a[i] = read_index(arr[i], m, "pure[" + std::to_string(i) + "]");
    return a;
  }
  const Json& rows = j["mixed"];
  if (!rows.is_array() || static_cast<int>(rows.size()) != n) fail("mixed", "expected " + std::to_string(n) + " rows");
  MixedProfile p(n, m);
  for (int i = 0; i < n; ++i) {
    const std::string row = "mixed[" + std::to_string(i) + "]";
    if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != m) fail(row, "expected " + std::to_string(m) + " entries");
    for (int a = 0; a < m; ++a) p(i, a) = read_double(rows[i][a], row + "[" + std::to_string(a) + "]");
  }
  try {
    p.validate(n, m);
  } catch (const ValidationError& e) {
    fail("mixed", e.what());
  }
  return p;
}

MixedProfile as_mixed(const Profile& p, int m) {
  if (const auto* a = std::get_if<PureProfile>(&p)) return MixedProfile::from_pure(*a, m);
  return std::get<MixedProfile>(p);
}

Json check_result_to_json(const CheckResult& r) {
  if (std::holds_alternative<Valid>(r)) return Json{{"kind", "valid"}};
  if (const auto* v = std::get_if<RangeViolation>(&r)) {
    return Json{{"kind", "range_violation"},
                {"player", v->player + 1},
                {"action", v->action + 1},
                {"direction", v->direction == RangeDirection::kAboveOne ? "above_one" : "below_zero"},
                {"extreme_payoff", v->extreme_payoff}};
  }
  const auto& w = std::get<LipschitzWitness>(r);
  return Json{{"kind", "lipschitz_witness"},
              {"player", w.player + 1},
              {"profile_a", one_based(w.profile_a.actions)},
              {"profile_b", one_based(w.profile_b.actions)},
              {"hamming_distance", hamming_distance_excluding(w.profile_a, w.profile_b, w.player)},
              {"observed_gap", w.observed_gap},
              {"allowed_gap", w.allowed_gap}};
}

Json bound_check_to_json(const BoundCheck& c) {
  return Json{{"name", c.name},         {"value", c.value}, {"bound", c.bound},
              {"tolerance", c.tolerance}, {"strict", c.strict}, {"hard", c.hard},
              {"ok", c.ok}};
}

Json solver_config_to_json(const SolverConfig& c) {
  Json j;
  j["target_epsilon"] = c.target_epsilon;
  j["max_iterations"] = c.max_iterations;
  j["step_schedule"] = c.step_schedule == StepSchedule::kHarmonic ? "harmonic" : "fixed";
  j["fixed_step"] = c.fixed_step;
  j["smoothing"] = c.smoothing;
  j["seed"] = c.seed;
  if (c.uniform_grid_k) j["uniform_grid_k"] = *c.uniform_grid_k;
  j["refine"] = c.refine;
  j["max_newton_steps"] = c.max_newton_steps;
  return j;
}

SolverConfig solver_config_from_json(const Json& j, SolverConfig c) {
  if (!j.is_object()) fail("solver", "expected an object");
  static const std::set<std::string> known = {"target_epsilon", "max_iterations", "step_schedule",
                                              "fixed_step",     "smoothing",      "seed",
                                              "uniform_grid_k", "refine",         "max_newton_steps"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) fail("solver", "unknown key '" + key + "'");
  }
  if (j.contains("target_epsilon")) c.target_epsilon = read_double(j["target_epsilon"], "solver.target_epsilon");
  if (j.contains("max_iterations")) c.max_iterations = read_int(j["max_iterations"], "solver.max_iterations");
  if (j.contains("step_schedule")) {
    const auto& s = j["step_schedule"];
    if (s == "harmonic") c.step_schedule = StepSchedule::kHarmonic;
    else if (s == "fixed") c.step_schedule = StepSchedule::kFixed;
    else fail("solver.step_schedule", "expected 'harmonic' or 'fixed'");
  }
  if (j.contains("fixed_step")) c.fixed_step = read_double(j["fixed_step"], "solver.fixed_step");
  if (j.contains("smoothing")) c.smoothing = read_double(j["smoothing"], "solver.smoothing");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) fail("solver.seed", "expected an integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("uniform_grid_k")) c.uniform_grid_k = read_int(j["uniform_grid_k"], "solver.uniform_grid_k");
  if (j.contains("refine")) {
    if (!j["refine"].is_boolean()) fail("solver.refine", "expected a boolean");
    c.refine = j["refine"].get<bool>();
  }
  if (j.contains("max_newton_steps")) c.max_newton_steps = read_int(j["max_newton_steps"], "solver.max_newton_steps");
  try {
    c.validate();
  } catch (const std::exception& e) {
    fail("solver", e.what());
  }
  return c;
}

Json solve_result_to_json(const SolveResult& r) {
  return Json{{"method", r.method},
              {"converged", r.converged},
              {"iterations", r.iterations_used},
              {"achieved_max_regret", r.achieved_max_regret}};
}

Json purify_result_to_json(const PurifyResult& result) {
  Json j;
  j["mode"] = purify_mode_name(result.mode);
  j["profile"] = profile_to_json(result.profile);
  j["final_max_regret"] = result.final_max_regret;
  j["regret_bound"] = result.regret_bound;
  j["trace"] = std::visit(
      [](const auto& t) {
        if constexpr (std::is_same_v<std::decay_t<decltype(t)>, BinaryPurifyTrace>) return binary_trace_to_json(t);
        else return m_trace_to_json(t);
      },
      result.trace);
  return j;
}

Json reduction_report_to_json(const ReductionReport& r) {
  Json j;
  j["n"] = r.n;
  j["m"] = r.m;
  j["L"] = r.L;
  j["N"] = r.N;
  j["view"] = r.view;
  j["lambda"] = r.base_lambda;
  j["population_lambda"] = r.population_lambda;
  j["epsilon"] = r.epsilon;
  j["paper_L"] = r.paper_L;
  j["meets_paper_L"] = r.meets_paper_L;
  j["solver"] = {{"method", r.solver_method}, {"converged", r.solver_converged}, {"achieved_max_regret", r.solver_regret}};
  j["purify_mode"] = r.purify_mode;
  j["population_regret"] = r.purified_regret;
  j["population_regret_bound"] = r.purify_bound;
  j["aggregated_regret"] = r.aggregated_regret;
  j["aggregated_support_regret"] = r.aggregated_support_regret;
  j["within_epsilon"] = r.within_epsilon;
  return j;
}

std::string game_digest(const PolymatrixGame& game) {
  std::uint64_t h = 14695981039346656037ull;
  auto feed = [&h](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t k = 0; k < len; ++k) {
      h ^= p[k];
      h *= 1099511628211ull;
    }
  };
  const std::int64_t n = game.num_players(), m = game.num_actions();
  const double lambda = game.lambda();
  feed(&n, sizeof n);
  feed(&m, sizeof m);
  feed(&lambda, sizeof lambda);
  for (double x : game.coefficients()) {
    if (x == 0.0) x = 0.0;  // fold -0.0
    feed(&x, sizeof x);
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path + ": cannot open file: " + std::strerror(errno));
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // Turn the byte offset into line:column.
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    const auto pos = what.find("syntax error");
    throw ValidationError(path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " +
                          (pos == std::string::npos ? what : what.substr(pos)));
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError(path + ": cannot open for writing: " + std::strerror(errno));
  out << text;
  if (!out) throw ValidationError(path + ": write failed");
}

PolymatrixGame read_game_file(const std::string& path) {
  const Json j = read_json_file(path);
  try {
    return game_from_json(j);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

}  // namespace lippoly
