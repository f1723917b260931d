#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "isneak/engine.hpp"
#include "isneak/model.hpp"
#include "isneak/preprocess.hpp"

namespace isneak {

struct NgaConfig {
  std::size_t population = 100;
  std::size_t generations = 100;  // the initial population counts as the first
  double crossover_rate = 0.90;
  double mutation_rate = -1.0;    // negative: 1 / attribute count
  std::uint64_t seed = 1;

  void validate() const;
};

/// Generational GA over raw model assignments. Offspring are evaluated
/// whether valid or not; only the final report rejects invalid individuals.
/// Needs a CNF-backed pool with a per-feature goal table.
RunResult nga_run(const CandidatePool& pool, const NgaConfig& config);

struct FlashConfig {
  std::size_t m0 = 60;
  std::size_t budget = 120;
  std::uint64_t seed = 1;

  void validate() const;
};

struct CartConfig {
  std::size_t min_split = 4;  // nodes smaller than this become leaves
};

struct RegressionTree {
  struct Node {
    int column = -1;         // -1 for leaves
    double threshold = 0.5;
    int left = -1;           // column value below threshold
    int right = -1;
    double value = 0.0;      // member mean
    std::size_t n = 0;
  };
  std::vector<Node> nodes;   // nodes[0] is the root

  double predict(const BitMatrix& bits, std::size_t row) const;
  std::size_t leaves() const;
  std::size_t depth() const;
};

/// Greedy variance-reduction CART over one-hot columns. `rows` index into
/// `bits`; `targets` holds one value per row.
RegressionTree cart_fit(const BitMatrix& bits, std::span<const std::size_t> rows,
                        std::span<const double> targets, const CartConfig& config = {});

/// Sequential model-based optimization: m0 random evaluations, then one
/// acquisition per iteration until the budget is spent.
RunResult flash_run(const CandidatePool& pool, const EncodedPool& encoded, const FlashConfig& config);

/// argmax of sum_i g_i * w_i * r_i over rows of `predictions` (already
/// normalized); ties go to the lowest row.
std::size_t flash_acquire(const std::vector<std::vector<double>>& predictions,
                          std::span<const double> weights, std::span<const double> r);

}  // namespace isneak
