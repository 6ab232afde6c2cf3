#pragma once

// Core data types: profiles, payoff tables and the polymatrix game itself.
//
// Indices are 0-based everywhere in the library. The JSON wire format is
// 1-based; conversion happens in io.cpp and nowhere else.

#include <cstddef>
#include <optional>
#include <span>
#include <initializer_list>
#include <vector>

namespace lippoly {

using Player = int;
using Action = int;

// Absolute tolerance for every comparison against a bound.
inline constexpr double kTolerance = 1e-9;
// Regret values above -kRegretFloor are clamped to zero.
inline constexpr double kRegretFloor = 1e-12;

struct PureProfile {
  std::vector<Action> actions;

  PureProfile() = default;
  explicit PureProfile(std::vector<Action> a) : actions(std::move(a)) {}
  PureProfile(std::initializer_list<Action> a) : actions(a) {}
  PureProfile(int n, Action fill) : actions(static_cast<std::size_t>(n), fill) {}

  int size() const { return static_cast<int>(actions.size()); }
  Action operator[](Player i) const { return actions[static_cast<std::size_t>(i)]; }
  Action& operator[](Player i) { return actions[static_cast<std::size_t>(i)]; }

  // Throws UsageError unless the profile has n entries, each in [0, m).
  void validate(int n, int m) const;

  bool operator==(const PureProfile&) const = default;
};

// n x m row-stochastic matrix, row-major.
class MixedProfile {
 public:
  MixedProfile() = default;
  MixedProfile(int n, int m);  // all zeros; fill rows before use
  MixedProfile(int n, int m, std::vector<double> probs);

  static MixedProfile uniform(int n, int m);
  static MixedProfile from_pure(const PureProfile& pure, int m);

  int num_players() const { return n_; }
  int num_actions() const { return m_; }

  double operator()(Player i, Action j) const { return probs_[index(i, j)]; }
  double& operator()(Player i, Action j) { return probs_[index(i, j)]; }

  std::span<const double> row(Player i) const {
    return {probs_.data() + static_cast<std::size_t>(i) * m_, static_cast<std::size_t>(m_)};
  }
  std::span<double> row(Player i) {
    return {probs_.data() + static_cast<std::size_t>(i) * m_, static_cast<std::size_t>(m_)};
  }
  const std::vector<double>& data() const { return probs_; }

  // Replace row i by the point mass on action j.
  void set_pure(Player i, Action j);

  // True iff row i puts probability one on a single action.
  bool row_is_pure(Player i) const;
  bool is_pure_valued() const;
  // The action profile if the profile is pure-valued.
  std::optional<PureProfile> to_pure() const;

  // Throws ValidationError if the shape is not n x m, an entry is negative or
  // non-finite, or a row sum is off by more than kTolerance.
  void validate(int n, int m) const;

  bool operator==(const MixedProfile&) const = default;

 private:
  std::size_t index(Player i, Action j) const {
    return static_cast<std::size_t>(i) * m_ + static_cast<std::size_t>(j);
  }

  int n_ = 0;
  int m_ = 0;
  std::vector<double> probs_;
};

// Entry (i, j) is u_i(j, p_-i): player i's expected payoff for action j
// against the rest of a profile.
class PayoffTable {
 public:
  PayoffTable() = default;
  PayoffTable(int n, int m)
      : n_(n), m_(m), values_(static_cast<std::size_t>(n) * m, 0.0) {}

  int num_players() const { return n_; }
  int num_actions() const { return m_; }
  double operator()(Player i, Action j) const {
    return values_[static_cast<std::size_t>(i) * m_ + j];
  }
  double& operator()(Player i, Action j) {
    return values_[static_cast<std::size_t>(i) * m_ + j];
  }
  std::span<const double> row(Player i) const {
    return {values_.data() + static_cast<std::size_t>(i) * m_, static_cast<std::size_t>(m_)};
  }
  std::span<double> row(Player i) {
    return {values_.data() + static_cast<std::size_t>(i) * m_, static_cast<std::size_t>(m_)};
  }
  const std::vector<double>& data() const { return values_; }

 private:
  int n_ = 0;
  int m_ = 0;
  std::vector<double> values_;
};

// Read access to a polymatrix payoff structure. Implemented by the dense
// PolymatrixGame and by the lazy population view.
class GameView {
 public:
  virtual ~GameView() = default;

  virtual int num_players() const = 0;
  virtual int num_actions() const = 0;
  // Declared Lipschitz parameter.
  virtual double lambda() const = 0;

  // Payoff contribution to player i playing j when player ip plays jp.
  // Zero when i == ip.
  virtual double coefficient(Player i, Player ip, Action j, Action jp) const = 0;

  virtual PayoffTable payoff_table(const MixedProfile& p) const = 0;
};

// Dense n x n x m x m coefficient array plus the declared Lipschitz parameter.
// The i == ip blocks are stored as zeros and never read.
class PolymatrixGame final : public GameView {
 public:
  // All-zero game.
  PolymatrixGame(int n, int m, double lambda);
  // beta is row-major over (i, ip, j, jp); diagonal blocks are zeroed.
  PolymatrixGame(int n, int m, double lambda, std::vector<double> beta);

  int num_players() const override { return n_; }
  int num_actions() const override { return m_; }
  double lambda() const override { return lambda_; }

  double coefficient(Player i, Player ip, Action j, Action jp) const override {
    return beta_[index(i, ip, j, jp)];
  }
  // Checked accessor; throws UsageError on bad indices.
  double at(Player i, Player ip, Action j, Action jp) const;

  void set_coefficient(Player i, Player ip, Action j, Action jp, double value);
  // m x m block of player i's payoffs against ip, row-major over (j, jp).
  std::span<const double> block(Player i, Player ip) const;
  void set_block(Player i, Player ip, std::span<const double> matrix);

  const std::vector<double>& coefficients() const { return beta_; }

  // Uses the OpenMP kernel.
  PayoffTable payoff_table(const MixedProfile& p) const override;

  bool operator==(const PolymatrixGame& o) const {
    return n_ == o.n_ && m_ == o.m_ && lambda_ == o.lambda_ && beta_ == o.beta_;
  }

 private:
  std::size_t index(Player i, Player ip, Action j, Action jp) const {
    return ((static_cast<std::size_t>(i) * n_ + ip) * m_ + j) * m_ + jp;
  }
  void check_indices(Player i, Player ip, Action j, Action jp) const;

  int n_;
  int m_;
  double lambda_;
  std::vector<double> beta_;
};

// Dense copy of any view, read through coefficient().
PolymatrixGame to_dense(const GameView& view);

}  // namespace lippoly
