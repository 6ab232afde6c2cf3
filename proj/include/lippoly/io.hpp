#pragma once

// JSON wire format. Every player and action index is 1-based on the wire and
// 0-based in memory; this file and io.cpp are the only place that converts.
//
//   game:    {"n", "m", "lambda", "beta": [{"i", "ip", "matrix": [[..]..]}]}
//   profile: {"pure": [a_1, ..]} or {"mixed": [[p_11, ..], ..]}

#include <cstdint>
#include <string>
#include <variant>

#include <json.hpp>

#include "lippoly/game.hpp"
#include "lippoly/population.hpp"
#include "lippoly/purifier.hpp"
#include "lippoly/solver.hpp"
#include "lippoly/validation.hpp"

namespace lippoly {

using Json = nlohmann::ordered_json;

using Profile = std::variant<PureProfile, MixedProfile>;

// Only non-zero off-diagonal blocks are written.
Json game_to_json(const PolymatrixGame& game);
// Throws ValidationError naming the offending path, e.g. "beta[3].matrix[1]".
PolymatrixGame game_from_json(const Json& j);

Json profile_to_json(const PureProfile& a);
Json profile_to_json(const MixedProfile& p);
// n and m are those of the game the profile belongs to.
Profile profile_from_json(const Json& j, int n, int m);
MixedProfile as_mixed(const Profile& p, int m);

Json check_result_to_json(const CheckResult& r);
Json bound_check_to_json(const BoundCheck& c);
Json solver_config_to_json(const SolverConfig& c);
// Missing keys keep the defaults of `base`.
SolverConfig solver_config_from_json(const Json& j, SolverConfig base);
Json solve_result_to_json(const SolveResult& r);

// Serializes whatever `result` recorded; the trace level was fixed when the
// purifier ran.
Json purify_result_to_json(const PurifyResult& result);
Json reduction_report_to_json(const ReductionReport& r);

// FNV-1a 64 over n, m, lambda and the coefficient array, as 16 hex digits.
std::string game_digest(const PolymatrixGame& game);

// Parse errors become ValidationError("<path>:<line>:<col>: ...").
Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
PolymatrixGame read_game_file(const std::string& path);

}  // namespace lippoly
