#include "lippoly/generator.hpp"

#include <algorithm>
#include <random>

#include "lippoly/errors.hpp"

namespace lippoly {

namespace {

void check_spec(const GeneratorSpec& spec) {
  if (spec.n < 1) throw UsageError("generator: n must be at least 1");
  if (spec.m < 2) throw UsageError("generator: m must be at least 2");
  if (!(spec.lambda > 0.0 && spec.lambda <= 1.0)) {
    throw UsageError("generator: lambda must lie in (0, 1], got " +
                     std::to_string(spec.lambda));
  }
  if (spec.family == Family::kSparse && !(spec.density >= 0.0 && spec.density <= 1.0)) {
    throw UsageError("generator: density must lie in [0, 1]");
  }
  if (spec.family == Family::kCoordinationMix &&
      !(spec.weight >= 0.0 && spec.weight <= 1.0)) {
    throw UsageError("generator: weight must lie in [0, 1]");
  }
}

}  // namespace

PolymatrixGame generate(const GeneratorSpec& spec) {
  check_spec(spec);
  const int n = spec.n;
  const int m = spec.m;
  PolymatrixGame game(n, m, spec.lambda);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> coef(0.0, spec.lambda);
  std::bernoulli_distribution keep(spec.family == Family::kSparse ? spec.density : 1.0);

  std::vector<double> block(static_cast<std::size_t>(m) * m);
  for (int i = 0; i < n; ++i) {
    for (int ip = 0; ip < n; ++ip) {
      if (ip == i) continue;
      if (spec.family == Family::kSparse && !keep(rng)) continue;
      for (int j = 0; j < m; ++j) {
        for (int jp = 0; jp < m; ++jp) {
          double v = coef(rng);
          if (spec.family == Family::kCoordinationMix) {
            v = (1.0 - spec.weight) * v + (j == jp ? spec.weight * spec.lambda : 0.0);
          }
          block[static_cast<std::size_t>(j) * m + jp] = v;
        }
      }
      // Shift any row with a negative entry so its minimum is zero.
      for (int j = 0; j < m; ++j) {
        auto first = block.begin() + static_cast<std::ptrdiff_t>(j) * m;
        const double lo = *std::min_element(first, first + m);
        if (lo < 0.0) std::for_each(first, first + m, [lo](double& x) { x -= lo; });
      }
      game.set_block(i, ip, block);
    }
  }

  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      double sum_max = 0.0;
      for (int ip = 0; ip < n; ++ip) {
        if (ip == i) continue;
        const auto blk = game.block(i, ip);
        sum_max += *std::max_element(blk.begin() + j * m, blk.begin() + (j + 1) * m);
      }
      worst = std::max(worst, sum_max);
    }
  }
  if (worst > 1.0) {
    std::vector<double> beta = game.coefficients();
    const double scale = (1.0 - 1e-12) / worst;
    for (double& x : beta) x *= scale;
    game = PolymatrixGame(n, m, spec.lambda, std::move(beta));
  }
  return game;
}

Family parse_family(const std::string& name) {
  if (name == "uniform" || name == "uniform_coefficients") return Family::kUniformCoefficients;
  if (name == "sparse") return Family::kSparse;
  if (name == "coordination" || name == "coordination_mix") return Family::kCoordinationMix;
  throw UsageError("unknown family '" + name +
                   "' (expected uniform_coefficients, sparse or coordination_mix)");
}

std::string family_name(Family family) {
  switch (family) {
    case Family::kUniformCoefficients:
      return "uniform_coefficients";
    case Family::kSparse:
      return "sparse";
    case Family::kCoordinationMix:
      return "coordination_mix";
  }
  return "unknown";
}

}  // namespace lippoly
