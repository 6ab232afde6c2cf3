#include "lippoly/purifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "lippoly/evaluation.hpp"

namespace lippoly {

namespace {

std::vector<Player> resolve_order(const std::vector<Player>& order, int n) {
  if (order.empty()) {
    std::vector<Player> id(static_cast<std::size_t>(n));
    std::iota(id.begin(), id.end(), 0);
    return id;
  }
  if (static_cast<int>(order.size()) != n) {
    throw UsageError("player order must list all " + std::to_string(n) + " players");
  }
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (Player i : order) {
    if (i < 0 || i >= n || seen[i]) throw UsageError("player order is not a permutation");
    seen[i] = 1;
  }
  return order;
}

void add_check(std::vector<BoundCheck>& checks, std::string name, double value, double bound,
               double tolerance, bool strict, bool hard) {
  BoundCheck c;
  c.name = std::move(name);
  c.value = value;
  c.bound = bound;
  c.tolerance = tolerance;
  c.strict = strict;
  c.hard = hard;
  c.ok = strict ? value < bound + tolerance : value <= bound + tolerance;
  checks.push_back(std::move(c));
}

void throw_if_breached(const std::vector<BoundCheck>& checks) {
  for (const auto& c : checks) {
    if (c.hard && !c.ok) {
      std::ostringstream os;
      os << "invariant breach: " << c.name << " (" << c.value << (c.strict ? " >= " : " > ")
         << c.bound << ")";
      throw InvariantBreach(os.str(), checks);
    }
  }
}

void warn_soft_failures(const std::vector<BoundCheck>& checks, std::size_t from,
                        std::vector<std::string>& warnings) {
  for (std::size_t k = from; k < checks.size(); ++k) {
    if (!checks[k].hard && !checks[k].ok) warnings.push_back("soft bound exceeded: " + checks[k].name);
  }
}

// Regret-quality precondition. Hard failure beyond twice the requirement;
// between the two the run continues with a warning.
bool check_quality(double value, Player player, double required, const char* what) {
  if (value > 2.0 * required + kTolerance) {
    std::ostringstream os;
    os << what << ": player " << player << " has regret " << value << ", required <= "
       << required;
    throw PreconditionViolation(os.str(), player, value, required);
  }
  return value > required + kTolerance;
}

double squared(double x) { return x * x; }

RelevantSnapshot snapshot(const std::vector<Action>& set, std::span<const double> u) {
  RelevantSnapshot s;
  s.actions = set;
  s.payoffs.reserve(set.size());
  for (Action j : set) s.payoffs.push_back(u[j]);
  double mean = 0.0;
  for (double x : s.payoffs) mean += x;
  mean /= static_cast<double>(set.size());
  double var = 0.0;
  for (double x : s.payoffs) var += squared(x - mean);
  s.mean = mean;
  s.variance = var / static_cast<double>(set.size());
  return s;
}

double set_variance(const std::vector<Action>& set, std::span<const double> u) {
  return snapshot(set, u).variance;
}

std::vector<double> discrepancies(const PayoffTable& t) {
  std::vector<double> d(static_cast<std::size_t>(t.num_players()));
  for (int i = 0; i < t.num_players(); ++i) d[i] = t(i, 1) - t(i, 0);
  return d;
}

void require_binary(const GameView& game, const char* op) {
  if (game.num_actions() != 2) {
    throw UnsupportedOperation(std::string(op) + " requires m = 2, got m = " +
                               std::to_string(game.num_actions()));
  }
}

// Simultaneous best-response switch of every player whose regret passes the
// threshold. All decisions read the same input table.
PureProfile switch_high_regret(const GameView& game, const PureProfile& pure,
                               const std::vector<Player>& order, double threshold,
                               bool inclusive, std::vector<Player>& switched) {
  const auto table = game.payoff_table(MixedProfile::from_pure(pure, game.num_actions()));
  PureProfile out = pure;
  switched.clear();
  for (Player i : order) {
    const auto row = table.row(i);
    const double best = *std::max_element(row.begin(), row.end());
    const double r = std::max(0.0, best - row[pure[i]]);
    if (inclusive ? r >= threshold : r > threshold) {
      out[i] = best_response(row);
      switched.push_back(i);
    }
  }
  std::sort(switched.begin(), switched.end());
  return out;
}

}  // namespace

TraceLevel parse_trace_level(const std::string& s) {
  if (s == "full") return TraceLevel::kFull;
  if (s == "potentials") return TraceLevel::kPotentials;
  if (s == "off") return TraceLevel::kOff;
  throw UsageError("unknown trace level '" + s + "' (full | potentials | off)");
}

std::string trace_level_name(TraceLevel level) {
  switch (level) {
    case TraceLevel::kFull: return "full";
    case TraceLevel::kPotentials: return "potentials";
    case TraceLevel::kOff: return "off";
  }
  return "full";
}

PurifyMode parse_purify_mode(const std::string& s) {
  if (s == "binary") return PurifyMode::kBinary;
  if (s == "m_action") return PurifyMode::kMAction;
  if (s == "auto") return PurifyMode::kAuto;
  throw UsageError("unknown purify mode '" + s + "' (binary | m_action | auto)");
}

std::string purify_mode_name(PurifyMode mode) {
  switch (mode) {
    case PurifyMode::kBinary: return "binary";
    case PurifyMode::kMAction: return "m_action";
    case PurifyMode::kAuto: return "auto";
  }
  return "auto";
}

BinaryThresholds binary_thresholds(int n, double lambda) {
  const double nn = n;
  BinaryThresholds t{};
  t.epsilon0 = lambda / 8.0;
  t.wsne_bound = lambda * std::sqrt(nn);
  t.step1_threshold = 0.5 * lambda * std::sqrt(nn);
  t.cost_bound = 5.0 * lambda * lambda * nn * nn;
  t.delta = lambda * std::cbrt(20.0 * nn * nn);
  t.regret_bound = lambda * std::cbrt(70.0 * nn * nn);
  return t;
}

MActionThresholds m_action_thresholds(int n, int m, double lambda) {
  const double nn = n, mm = m;
  const double frac = (mm - 1.0) / mm;
  const double log3m = std::log(3.0 * mm);
  MActionThresholds t{};
  t.epsilon0 = frac * frac * lambda;
  t.delta0 = std::sqrt(2.0 * (nn - 1.0) * lambda * t.epsilon0);
  t.epsilon1 = 2.0 * std::sqrt(2.0 * nn * lambda * t.epsilon0);
  t.delta1 = 4.0 * lambda * std::cbrt(nn * nn * mm * log3m);
  t.initial_budget = 2.0 * squared(nn * lambda * frac);
  t.growth_budget = 4.0 * nn * lambda * lambda * (std::log(mm - 1.0) + 1.0);
  t.step_budget = squared(frac * nn * lambda);
  t.terminal_bound = 8.0 * nn * nn * lambda * lambda * log3m;
  t.switch_bound = 16.0 * nn * nn * lambda * lambda * mm * log3m / squared(t.delta1);
  t.regret_bound = 6.0 * lambda * std::cbrt(nn * nn * mm * log3m);
  return t;
}

std::vector<SetAddition> grow_relevant_set(std::vector<Action>& set,
                                           std::span<const double> payoffs) {
  const int m = static_cast<int>(payoffs.size());
  if (set.empty()) throw UsageError("relevant set must start non-empty");
  std::vector<char> in(static_cast<std::size_t>(m), 0);
  for (Action j : set) {
    if (j < 0 || j >= m) throw UsageError("relevant set action out of range");
    in[j] = 1;
  }
  std::vector<SetAddition> out;
  auto snap = snapshot(set, payoffs);
  while (static_cast<int>(set.size()) < m) {
    Action best = -1;
    for (Action j = 0; j < m; ++j) {
      if (!in[j] && (best < 0 || payoffs[j] > payoffs[best])) best = j;
    }
    if (payoffs[best] < snap.mean) break;
    SetAddition a;
    a.action = best;
    a.size_before = static_cast<int>(set.size());
    a.mean_before = snap.mean;
    a.variance_before = snap.variance;
    a.payoff = payoffs[best];
    set.insert(std::lower_bound(set.begin(), set.end(), best), best);
    in[best] = 1;
    snap = snapshot(set, payoffs);
    a.variance_after = snap.variance;
    out.push_back(a);
  }
  return out;
}

double variance_addition_delta(int k, double mu, double sigma2, double x) {
  const double k1 = k + 1.0;
  return (k / k1 * squared(x - mu) - sigma2) / k1;
}

// ---- binary path ----------------------------------------------------------

WsneStep ane_to_wsne_binary_step(const GameView& game, const MixedProfile& profile,
                                 const PurifyOptions& options) {
  require_binary(game, "ane_to_wsne_binary");
  const int n = game.num_players();
  profile.validate(n, 2);
  const auto order = resolve_order(options.order, n);
  const auto th = binary_thresholds(n, game.lambda());

  const auto table = game.payoff_table(profile);
  const auto report = regret_report(table, profile);
  WsneStep out;
  out.required_regret = th.epsilon0;
  out.input_max_regret = report.max_regret;
  out.precondition_relaxed = check_quality(report.max_regret, report.argmax_player, th.epsilon0,
                                           "ane_to_wsne_binary precondition");

  out.profile = profile;
  for (Player i : order) {
    const double d = table(i, 1) - table(i, 0);
    if (std::abs(d) > th.step1_threshold) {
      const Action br = d > 0 ? 1 : 0;
      if (!(profile.row_is_pure(i) && profile(i, br) == 1.0)) out.switched.push_back(i);
      out.profile.set_pure(i, br);
    }
  }
  std::sort(out.switched.begin(), out.switched.end());
  out.support_bound = th.wsne_bound;
  out.support_regret = max_support_regret(game, out.profile);
  return out;
}

MixedProfile ane_to_wsne_binary(const GameView& game, const MixedProfile& profile,
                                const PurifyOptions& options) {
  auto step = ane_to_wsne_binary_step(game, profile, options);
  std::vector<BoundCheck> checks;
  add_check(checks, "wsne support regret", step.support_regret, step.support_bound, kTolerance,
            false, !step.precondition_relaxed);
  throw_if_breached(checks);
  return std::move(step.profile);
}

BinaryRounding purify_rounding_binary(const GameView& game, const MixedProfile& wsne,
                                      const PurifyOptions& options) {
  require_binary(game, "purify_rounding_binary");
  const int n = game.num_players();
  wsne.validate(n, 2);
  const double lambda = game.lambda();
  const auto th = binary_thresholds(n, lambda);

  BinaryRounding res;
  auto& tr = res.trace;
  tr.level = options.trace;
  tr.n = n;
  tr.lambda = lambda;
  tr.epsilon0 = th.epsilon0;
  tr.wsne_bound = th.wsne_bound;
  tr.cost_bound = th.cost_bound;
  tr.delta = th.delta;
  tr.regret_bound = th.regret_bound;
  tr.order = resolve_order(options.order, n);
  const bool full = tr.level == TraceLevel::kFull;
  const bool potentials = tr.level != TraceLevel::kOff;

  MixedProfile p = wsne;
  auto table = game.payoff_table(p);
  tr.wsne_support_regret = max_support_regret(table, p);
  {
    Player worst = 0;
    double worst_r = -1.0;
    for (int i = 0; i < n; ++i) {
      double r = 0.0;
      for (int j = 0; j < 2; ++j) {
        if (p(i, j) > 0.0) r = std::max(r, std::max(table(i, 0), table(i, 1)) - table(i, j));
      }
      if (r > worst_r) {
        worst_r = r;
        worst = i;
      }
    }
    tr.precondition_relaxed =
        check_quality(tr.wsne_support_regret, worst, th.wsne_bound, "purify_rounding_binary precondition");
  }
  const bool hard = !tr.precondition_relaxed;
  const double lam2n = lambda * lambda * n;
  const double member_cut = th.wsne_bound + kTolerance;

  std::vector<double> d = discrepancies(table);
  std::vector<char> in_s(static_cast<std::size_t>(n), 0);
  int s_size = 0;
  for (int i = 0; i < n; ++i) {
    if (std::abs(d[i]) <= member_cut) {
      in_s[i] = 1;
      ++s_size;
    }
  }
  auto cost_of = [&](const std::vector<double>& dd) {
    double c = 0.0;
    for (int i = 0; i < n; ++i) {
      if (in_s[i]) c += dd[i] * dd[i];
    }
    return c;
  };
  auto members = [&] {
    std::vector<Player> s;
    for (int i = 0; i < n; ++i) {
      if (in_s[i]) s.push_back(i);
    }
    return s;
  };

  double cost = cost_of(d);
  add_check(tr.checks, "initial cost", cost, lam2n * s_size, kTolerance, false, hard);
  if (potentials) tr.cost.push_back(cost);
  if (full) {
    tr.step_profiles.push_back(p);
    tr.relevant_sets.push_back(members());
  }

  double worst_cost_excess = -std::numeric_limits<double>::infinity();
  double worst_a_dp = 0.0;
  int sign_flips = 0;
  for (int t = 0; t < n; ++t) {
    const Player i = tr.order[t];
    BinaryStep step;
    step.step = t + 1;
    step.player = i;
    step.p_before = p(i, 1);
    const double cost_before = cost;

    if (p.row_is_pure(i)) {
      step.p_after = step.p_before;
      step.cost = cost;
    } else {
      step.was_mixed = true;
      MixedProfile q = p;
      q.set_pure(i, 0);
      const auto d0 = discrepancies(game.payoff_table(q));
      q.set_pure(i, 1);
      const auto d1 = discrepancies(game.payoff_table(q));
      double a = 0.0;
      for (int k = 0; k < n; ++k) {
        if (in_s[k]) a += 2.0 * d0[k] * (d1[k] - d0[k]);
      }
      Action bit;
      if (a > 0.0) {
        bit = 0;
      } else if (a < 0.0) {
        bit = 1;
      } else {
        bit = d[i] > 0.0 ? 1 : 0;
      }
      step.coefficient = a;
      step.p_after = bit;
      worst_a_dp = std::max(worst_a_dp, a * (step.p_after - step.p_before));
      p.set_pure(i, bit);
      const auto& dn = bit ? d1 : d0;
      for (int k = 0; k < n; ++k) {
        if (!in_s[k] && std::abs(dn[k]) <= member_cut) {
          in_s[k] = 1;
          ++s_size;
          step.new_members.push_back(k);
        } else if (!in_s[k] && (dn[k] > 0.0) != (d[k] > 0.0)) {
          ++sign_flips;
        }
      }
      d = dn;
      cost = cost_of(d);
      step.cost = cost;
    }
    step.cost_increase = cost - cost_before;
    step.cost_increase_bound =
        (step.was_mixed ? 4.0 * lam2n : 0.0) + lam2n * static_cast<double>(step.new_members.size());
    worst_cost_excess = std::max(worst_cost_excess, step.cost_increase - step.cost_increase_bound);
    if (potentials) {
      tr.cost.push_back(cost);
      tr.steps.push_back(std::move(step));
    }
    if (full) {
      tr.step_profiles.push_back(p);
      tr.relevant_sets.push_back(members());
    }
  }

  add_check(tr.checks, "step cost increase excess", n > 0 ? worst_cost_excess : 0.0, 0.0,
            kTolerance, false, hard);
  add_check(tr.checks, "rounding linear term A*dp", worst_a_dp, 0.0, 1e-12, false, hard);
  add_check(tr.checks, "sign changes outside relevant set", sign_flips, 0.0, 0.0, false, hard);

  tr.terminal_cost = cost;
  tr.terminal_relevant_size = s_size;
  add_check(tr.checks, "terminal cost", cost, th.cost_bound, kTolerance, false, hard);

  res.profile = *p.to_pure();
  tr.rounded_profile = res.profile;
  const auto rounded = regret_report(game, res.profile);
  double outside = 0.0;
  for (int k = 0; k < n; ++k) {
    if (!in_s[k]) outside = std::max(outside, rounded.per_player_regret[k]);
  }
  add_check(tr.checks, "regret outside relevant set", outside, 0.0, kTolerance, false, hard);
  warn_soft_failures(tr.checks, 0, tr.warnings);
  throw_if_breached(tr.checks);
  return res;
}

PureProfile correct_binary(const GameView& game, const PureProfile& pure, BinaryPurifyTrace& trace) {
  require_binary(game, "correct_binary");
  const int n = game.num_players();
  pure.validate(n, 2);
  const auto order = trace.order.empty() ? resolve_order({}, n) : trace.order;
  const std::size_t first = trace.checks.size();

  PureProfile out = switch_high_regret(game, pure, order, trace.delta, true, trace.switched_players);
  const double switch_bound = trace.terminal_cost / squared(trace.delta);
  add_check(trace.checks, "step 3 switchers", static_cast<double>(trace.switched_players.size()),
            switch_bound, kTolerance, false, !trace.precondition_relaxed);

  trace.final_profile = out;
  trace.final_max_regret = regret_report(game, out).max_regret;
  add_check(trace.checks, "final regret", trace.final_max_regret, trace.regret_bound, kTolerance,
            false, true);
  warn_soft_failures(trace.checks, first, trace.warnings);
  throw_if_breached(trace.checks);
  return out;
}

// ---- m-action path --------------------------------------------------------

namespace {

struct GrowthStats {
  double total = 0.0;
  double worst_excess = -std::numeric_limits<double>::infinity();
  double worst_postcondition = -std::numeric_limits<double>::infinity();
  int additions = 0;
};

void extend_relevant(std::vector<Action>& set, std::span<const double> u, double lambda,
                     GrowthStats& stats) {
  for (const auto& a : grow_relevant_set(set, u)) {
    const int k = a.size_before;
    const double delta = a.variance_after - a.variance_before;
    stats.total += delta;
    stats.worst_excess = std::max(stats.worst_excess, delta - 4.0 * k * lambda * lambda / squared(k + 1.0));
    ++stats.additions;
  }
  const double mean = snapshot(set, u).mean;
  std::vector<char> in(u.size(), 0);
  for (Action j : set) in[j] = 1;
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (!in[j]) stats.worst_postcondition = std::max(stats.worst_postcondition, u[j] - mean);
  }
}

}  // namespace

WsneStep ane_to_wsne_m_step(const GameView& game, const MixedProfile& profile,
                            const PurifyOptions& options) {
  const int n = game.num_players();
  const int m = game.num_actions();
  profile.validate(n, m);
  const auto order = resolve_order(options.order, n);
  const auto th = m_action_thresholds(n, m, game.lambda());

  const auto table = game.payoff_table(profile);
  const auto report = regret_report(table, profile);
  WsneStep out;
  out.required_regret = th.epsilon0;
  out.input_max_regret = report.max_regret;
  out.precondition_relaxed = check_quality(report.max_regret, report.argmax_player, th.epsilon0,
                                           "ane_to_wsne_m precondition");
  out.profile = profile;
  for (Player i : order) {
    const auto row = table.row(i);
    const double best = *std::max_element(row.begin(), row.end());
    const Action br = best_response(row);
    double moved = 0.0;
    for (Action j = 0; j < m; ++j) {
      if (profile(i, j) > 0.0 && best - row[j] > th.delta0) {
        moved += profile(i, j);
        out.profile(i, j) = 0.0;
      }
    }
    if (moved > 0.0) {
      out.profile(i, br) += moved;
      out.switched.push_back(i);
    }
  }
  std::sort(out.switched.begin(), out.switched.end());
  out.support_bound = th.epsilon1;
  out.support_regret = max_support_regret(game, out.profile);
  return out;
}

MixedProfile ane_to_wsne_m(const GameView& game, const MixedProfile& profile,
                           const PurifyOptions& options) {
  auto step = ane_to_wsne_m_step(game, profile, options);
  std::vector<BoundCheck> checks;
  add_check(checks, "wsne support regret", step.support_regret, step.support_bound, kTolerance,
            false, !step.precondition_relaxed);
  throw_if_breached(checks);
  return std::move(step.profile);
}

MActionRounding purify_rounding_m(const GameView& game, const MixedProfile& wsne,
                                  const PurifyOptions& options) {
  const int n = game.num_players();
  const int m = game.num_actions();
  wsne.validate(n, m);
  const double lambda = game.lambda();
  const auto th = m_action_thresholds(n, m, lambda);

  MActionRounding res;
  auto& tr = res.trace;
  tr.level = options.trace;
  tr.n = n;
  tr.m = m;
  tr.lambda = lambda;
  tr.epsilon0 = th.epsilon0;
  tr.epsilon1 = th.epsilon1;
  tr.delta0 = th.delta0;
  tr.delta1 = th.delta1;
  tr.initial_budget = th.initial_budget;
  tr.growth_budget = th.growth_budget;
  tr.step_budget = th.step_budget;
  tr.terminal_bound = th.terminal_bound;
  tr.switch_bound = th.switch_bound;
  tr.regret_bound = th.regret_bound;
  tr.order = resolve_order(options.order, n);
  const bool full = tr.level == TraceLevel::kFull;
  const bool potentials = tr.level != TraceLevel::kOff;

  MixedProfile p = wsne;
  auto table = game.payoff_table(p);
  tr.wsne_support_regret = max_support_regret(table, p);
  {
    const auto report = regret_report(table, p);
    // The WSNE quality is what matters here; report the worst player by
    // overall regret for the diagnostic.
    tr.precondition_relaxed = check_quality(tr.wsne_support_regret, report.argmax_player,
                                            th.epsilon1, "purify_rounding_m precondition");
  }
  const bool hard = !tr.precondition_relaxed;

  std::vector<std::vector<Action>> sets(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto row = table.row(i);
    const double best = *std::max_element(row.begin(), row.end());
    for (Action j = 0; j < m; ++j) {
      if (best - row[j] <= th.epsilon1) sets[i].push_back(j);
    }
  }
  auto total_variance = [&](const PayoffTable& t) {
    double v = 0.0;
    for (int i = 0; i < n; ++i) v += set_variance(sets[i], t.row(i));
    return v;
  };
  auto record = [&](const MixedProfile& prof, const PayoffTable& t, double var) {
    if (potentials) {
      tr.variance.push_back(var);
      std::vector<int> sizes(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) sizes[i] = static_cast<int>(sets[i].size());
      tr.relevant_sizes.push_back(std::move(sizes));
    }
    if (full) {
      tr.step_profiles.push_back(prof);
      std::vector<RelevantSnapshot> snaps;
      snaps.reserve(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) snaps.push_back(snapshot(sets[i], t.row(i)));
      tr.snapshots.push_back(std::move(snaps));
    }
  };

  double variance = total_variance(table);
  tr.initial_variance = variance;
  add_check(tr.checks, "initial variance", variance, th.initial_budget, kTolerance, false, hard);
  record(p, table, variance);

  GrowthStats growth;
  double worst_linear = 0.0;
  double worst_identity = 0.0;
  int support_escapes = 0;
  std::vector<double> r(static_cast<std::size_t>(m) * m), lmat;

  for (int t = 0; t < n; ++t) {
    const Player a = tr.order[t];
    MActionStep step;
    step.step = t + 1;
    step.player = a;
    step.variance_before = variance;

    // Player a's own payoffs do not depend on a's action, so S_a^(t) can be
    // formed before the move.
    extend_relevant(sets[a], table.row(a), lambda, growth);

    std::vector<double> b(static_cast<std::size_t>(m), 0.0);
    std::vector<double> pa(p.row(a).begin(), p.row(a).end());
    // Per-player quadratic parts, kept for the exactness self-check.
    std::vector<std::vector<double>> lcols(static_cast<std::size_t>(n));
    std::vector<double> quad_old(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
      if (i == a) continue;
      const auto& s = sets[i];
      const int k = static_cast<int>(s.size());
      for (int x = 0; x < k; ++x) {
        double mean = 0.0;
        for (Action jp = 0; jp < m; ++jp) {
          r[x * m + jp] = game.coefficient(i, a, s[x], jp);
          mean += r[x * m + jp];
        }
        mean /= m;
        for (Action jp = 0; jp < m; ++jp) r[x * m + jp] -= mean;
      }
      lmat.assign(static_cast<std::size_t>(k) * m, 0.0);
      for (Action jp = 0; jp < m; ++jp) {
        double col = 0.0;
        for (int x = 0; x < k; ++x) col += r[x * m + jp];
        col /= k;
        for (int x = 0; x < k; ++x) lmat[x * m + jp] = r[x * m + jp] - col;
      }
      const auto snap = snapshot(s, table.row(i));
      std::vector<double> lp(static_cast<std::size_t>(k), 0.0);
      for (int x = 0; x < k; ++x) {
        for (Action jp = 0; jp < m; ++jp) lp[x] += lmat[x * m + jp] * pa[jp];
      }
      for (int x = 0; x < k; ++x) {
        const double c = (snap.payoffs[x] - snap.mean) - lp[x];
        for (Action jp = 0; jp < m; ++jp) b[jp] += 2.0 * c * lmat[x * m + jp] / k;
        quad_old[i] += lp[x] * lp[x] / k;
      }
      lcols[i] = lmat;
    }

    if (p.row_is_pure(a)) {
      step.was_pure = true;
      step.chosen = std::max_element(pa.begin(), pa.end()) - pa.begin();
    } else {
      std::vector<char> in(static_cast<std::size_t>(m), 0);
      for (Action j : sets[a]) in[j] = 1;
      for (Action j = 0; j < m; ++j) {
        if (pa[j] > 0.0 && !in[j]) ++support_escapes;
      }
      Action best = sets[a].front();
      for (Action j : sets[a]) {
        if (b[j] < b[best]) best = j;
      }
      step.chosen = best;
    }
    double linear = 0.0;
    for (Action j = 0; j < m; ++j) linear += b[j] * ((j == step.chosen ? 1.0 : 0.0) - pa[j]);
    step.linear_term = step.was_pure ? 0.0 : linear;
    worst_linear = std::max(worst_linear, step.linear_term);

    if (!step.was_pure) {
      p.set_pure(a, step.chosen);
      table = game.payoff_table(p);
    }
    step.variance_after_move = total_variance(table);
    if (!step.was_pure) {
      double predicted = linear;
      for (int i = 0; i < n; ++i) {
        if (i == a) continue;
        const int k = static_cast<int>(sets[i].size());
        double q = 0.0;
        for (int x = 0; x < k; ++x) q += squared(lcols[i][x * m + step.chosen]);
        predicted += q / k - quad_old[i];
      }
      worst_identity = std::max(
          worst_identity, std::abs(predicted - (step.variance_after_move - step.variance_before)));
    }
    tr.step_total += step.variance_after_move - step.variance_before;

    const int adds_before = growth.additions;
    for (int i = 0; i < n; ++i) extend_relevant(sets[i], table.row(i), lambda, growth);
    step.additions = growth.additions - adds_before;
    variance = total_variance(table);
    step.variance_after = variance;
    if (potentials) {
      step.b = std::move(b);
      tr.steps.push_back(std::move(step));
    }
    record(p, table, variance);
  }
  tr.growth_total = growth.total;
  tr.terminal_variance = variance;

  add_check(tr.checks, "support inside relevant set", support_escapes, 0.0, 0.0, false, hard);
  add_check(tr.checks, "step linear term b*dp", worst_linear, 0.0, 1e-12, false, hard);
  add_check(tr.checks, "step variance decomposition error", worst_identity, 0.0, kTolerance, false,
            true);
  add_check(tr.checks, "single addition variance excess",
            growth.additions > 0 ? growth.worst_excess : 0.0, 0.0, 1e-12, false, hard);
  add_check(tr.checks, "relevant set loop postcondition",
            std::isfinite(growth.worst_postcondition) ? growth.worst_postcondition : -1.0, 0.0,
            1e-12, true, true);
  add_check(tr.checks, "variance growth from set additions", tr.growth_total, th.growth_budget,
            kTolerance, false, hard);
  add_check(tr.checks, "variance change from rounding", tr.step_total, th.step_budget, kTolerance,
            false, hard);
  add_check(tr.checks, "variance telescoping error",
            std::abs(tr.initial_variance + tr.growth_total + tr.step_total - tr.terminal_variance),
            0.0, kTolerance, false, true);
  add_check(tr.checks, "terminal variance", tr.terminal_variance, th.terminal_bound, kTolerance,
            true, hard);

  res.profile = *p.to_pure();
  tr.rounded_profile = res.profile;
  warn_soft_failures(tr.checks, 0, tr.warnings);
  throw_if_breached(tr.checks);
  return res;
}

PureProfile correct_m(const GameView& game, const PureProfile& pure, MActionPurifyTrace& trace) {
  const int n = game.num_players();
  const int m = game.num_actions();
  pure.validate(n, m);
  const auto th = m_action_thresholds(n, m, game.lambda());
  const auto order = trace.order.empty() ? resolve_order({}, n) : trace.order;
  const std::size_t first = trace.checks.size();

  PureProfile out = switch_high_regret(game, pure, order, th.delta1, false, trace.switched_players);
  add_check(trace.checks, "step 3 switchers", static_cast<double>(trace.switched_players.size()),
            th.switch_bound, kTolerance, false, !trace.precondition_relaxed);
  trace.final_profile = out;
  trace.final_max_regret = regret_report(game, out).max_regret;
  add_check(trace.checks, "final regret", trace.final_max_regret, th.regret_bound, kTolerance,
            false, true);
  warn_soft_failures(trace.checks, first, trace.warnings);
  throw_if_breached(trace.checks);
  return out;
}

// ---- dispatcher -----------------------------------------------------------

namespace {

// Step 2 and 3 checks depend only on the WSNE property, so a relaxed Step 1
// input softens only the WSNE check itself.
template <class Trace>
void attach_step1(Trace& tr, const WsneStep& s, const MixedProfile& input) {
  tr.input_max_regret = s.input_max_regret;
  tr.step1_switched = s.switched;
  if (s.precondition_relaxed) {
    std::ostringstream os;
    os << "input regret " << s.input_max_regret << " exceeds " << s.required_regret;
    tr.warnings.insert(tr.warnings.begin(), os.str());
  }
  BoundCheck c;
  c.name = "wsne support regret";
  c.value = s.support_regret;
  c.bound = s.support_bound;
  c.tolerance = kTolerance;
  c.hard = !s.precondition_relaxed;
  c.ok = c.value <= c.bound + c.tolerance;
  tr.checks.insert(tr.checks.begin(), c);
  if (tr.level == TraceLevel::kFull) {
    tr.input_profile = input;
    tr.wsne_profile = s.profile;
  }
}

}  // namespace

PurifyResult purify(const GameView& game, const MixedProfile& profile, PurifyMode mode,
                    const PurifyOptions& options) {
  if (mode == PurifyMode::kAuto) {
    mode = game.num_actions() == 2 ? PurifyMode::kBinary : PurifyMode::kMAction;
  }
  PurifyResult out;
  out.mode = mode;
  if (mode == PurifyMode::kBinary) {
    require_binary(game, "binary purification");
    const auto s1 = ane_to_wsne_binary_step(game, profile, options);
    if (!s1.precondition_relaxed && s1.support_regret > s1.support_bound + kTolerance) {
      std::vector<BoundCheck> checks;
      add_check(checks, "wsne support regret", s1.support_regret, s1.support_bound, kTolerance,
                false, true);
      throw_if_breached(checks);
    }
    auto rounding = purify_rounding_binary(game, s1.profile, options);
    out.profile = correct_binary(game, rounding.profile, rounding.trace);
    attach_step1(rounding.trace, s1, profile);
    rounding.trace.precondition_relaxed |= s1.precondition_relaxed;
    out.final_max_regret = rounding.trace.final_max_regret;
    out.regret_bound = rounding.trace.regret_bound;
    out.trace = std::move(rounding.trace);
  } else {
    const auto s1 = ane_to_wsne_m_step(game, profile, options);
    if (!s1.precondition_relaxed && s1.support_regret > s1.support_bound + kTolerance) {
      std::vector<BoundCheck> checks;
      add_check(checks, "wsne support regret", s1.support_regret, s1.support_bound, kTolerance,
                false, true);
      throw_if_breached(checks);
    }
    auto rounding = purify_rounding_m(game, s1.profile, options);
    out.profile = correct_m(game, rounding.profile, rounding.trace);
    attach_step1(rounding.trace, s1, profile);
    rounding.trace.precondition_relaxed |= s1.precondition_relaxed;
    out.final_max_regret = rounding.trace.final_max_regret;
    out.regret_bound = rounding.trace.regret_bound;
    out.trace = std::move(rounding.trace);
  }
  // Independent re-verification of the returned profile.
  const double fresh = regret_report(game, out.profile).max_regret;
  if (fresh != out.final_max_regret || fresh > out.regret_bound + kTolerance) {
    BoundCheck c{"re-verified final regret", fresh, out.regret_bound, kTolerance, false, true, false};
    throw InvariantBreach("invariant breach: re-verified final regret", {c});
  }
  return out;
}

const std::vector<BoundCheck>& trace_checks(const PurifyResult& result) {
  return std::visit([](const auto& t) -> const std::vector<BoundCheck>& { return t.checks; },
                    result.trace);
}

}  // namespace lippoly
