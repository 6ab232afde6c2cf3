#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lippoly {

// Index out of range, wrong profile length and similar caller mistakes.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input data: distributions that are not distributions, bad JSON.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operation is not defined for this game shape (e.g. discrepancy with m != 2).
class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Instance exceeds a size guard. Carries the estimate that triggered refusal.
class CapacityError : public std::runtime_error {
 public:
  CapacityError(const std::string& what, double estimate, double limit)
      : std::runtime_error(what), estimate_(estimate), limit_(limit) {}
  double estimate() const { return estimate_; }
  double limit() const { return limit_; }

 private:
  double estimate_;
  double limit_;
};

// Input profile is not an approximate equilibrium of the required quality.
class PreconditionViolation : public std::runtime_error {
 public:
  PreconditionViolation(const std::string& what, int player, double regret,
                        double required)
      : std::runtime_error(what),
        player_(player),
        regret_(regret),
        required_(required) {}
  int player() const { return player_; }
  double regret() const { return regret_; }
  double required() const { return required_; }

 private:
  int player_;
  double regret_;
  double required_;
};

// One named inequality evaluated at runtime.
struct BoundCheck {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  double tolerance = 0.0;
  bool strict = false;  // value < bound + tolerance instead of <=
  // Soft checks are recorded but never abort a run.
  bool hard = true;
  bool ok = true;
};

// A traced inequality failed. The full list of checks evaluated up to the
// failure is attached so callers can serialize a structured report.
class InvariantBreach : public std::runtime_error {
 public:
  InvariantBreach(const std::string& what, std::vector<BoundCheck> checks)
      : std::runtime_error(what), checks_(std::move(checks)) {}
  const std::vector<BoundCheck>& checks() const { return checks_; }

 private:
  std::vector<BoundCheck> checks_;
};

}  // namespace lippoly
