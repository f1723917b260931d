#include "isneak/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_map>

#include "isneak/error.hpp"
#include "isneak/ranking.hpp"

namespace isneak {

namespace {

double elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

std::string key_of(std::span<const std::uint8_t> bits) {
  return std::string(bits.begin(), bits.end());
}

}  // namespace

// --- NGA ---------------------------------------------------------------------

void NgaConfig::validate() const {
  require(population > 0 && generations > 0, "population and generations must be positive");
  require(crossover_rate >= 0.0 && crossover_rate <= 1.0, "crossover rate must lie in [0, 1]");
  require(mutation_rate <= 1.0, "mutation rate must not exceed 1");
}

namespace {

struct Individual {
  Bits genes;
  GoalVector goals;
  GoalView view;
  bool valid = false;
};

std::size_t best_of(const std::vector<Individual>& pop) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < pop.size(); ++i) {
    if (zitzler_worse(pop[best].view, pop[i].view)) best = i;
  }
  return best;
}

std::size_t worst_of(const std::vector<Individual>& pop) {
  std::size_t worst = 0;
  for (std::size_t i = 1; i < pop.size(); ++i) {
    if (zitzler_worse(pop[i].view, pop[worst].view)) worst = i;
  }
  return worst;
}

}  // namespace

RunResult nga_run(const CandidatePool& pool, const NgaConfig& config) {
  config.validate();
  if (!pool.model) throw Error(ErrorCode::unsupported, "NGA needs a constraint model, not a candidate table");
  if (pool.spec.per_feature_values.empty()) {
    throw Error(ErrorCode::unsupported, "NGA needs a per-feature goal table");
  }
  if (pool.size() == 0) throw Error(ErrorCode::empty_pool, "pool is empty");

  const auto start = std::chrono::steady_clock::now();
  const CnfModel& model = *pool.model;
  const std::size_t genes = model.num_vars;
  const double mutation = config.mutation_rate < 0.0 ? 1.0 / static_cast<double>(genes) : config.mutation_rate;
  Rng rng(config.seed);
  Evaluator evaluator(pool);

  auto make = [&](Bits g) {
    Individual ind;
    ind.goals = evaluator.evaluate_bits(g);
    ind.view = make_view(pool, ind.goals);
    ind.valid = check_validity(model, g);
    ind.genes = std::move(g);
    return ind;
  };

  // Initial population: distinct pool members while they last.
  std::vector<std::size_t> picks(pool.size());
  std::iota(picks.begin(), picks.end(), 0);
  rng.shuffle(std::span<std::size_t>(picks));
  std::vector<Individual> population;
  population.reserve(config.population);
  for (std::size_t i = 0; i < config.population; ++i) {
    const std::size_t idx = i < picks.size() ? picks[i] : picks[rng.below(picks.size())];
    population.push_back(make(pool.bits(idx)));
  }

  auto tournament = [&]() -> const Individual& {
    const auto& x = population[rng.below(population.size())];
    const auto& y = population[rng.below(population.size())];
    return zitzler_worse(x.view, y.view) ? y : x;
  };

  for (std::size_t gen = 1; gen < config.generations; ++gen) {
    std::vector<Individual> offspring;
    offspring.reserve(config.population);
    while (offspring.size() < config.population) {
      Bits a = tournament().genes;
      Bits b = tournament().genes;
      if (genes > 1 && rng.coin(config.crossover_rate)) {
        const std::size_t cut = 1 + rng.below(genes - 1);
        std::swap_ranges(a.begin() + static_cast<std::ptrdiff_t>(cut), a.end(),
                         b.begin() + static_cast<std::ptrdiff_t>(cut));
      }
      for (Bits* child : {&a, &b}) {
        if (offspring.size() == config.population) break;
        for (auto& bit : *child) {
          if (rng.coin(mutation)) bit ^= 1;
        }
        offspring.push_back(make(std::move(*child)));
      }
    }
    // The best parent survives in place of the worst child.
    offspring[worst_of(offspring)] = population[best_of(population)];
    population = std::move(offspring);
  }

  std::unordered_map<std::string, std::size_t> in_pool;
  in_pool.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) in_pool.emplace(key_of(pool.bits(i)), i);

  RunResult result;
  result.algorithm = "nga";
  result.model = pool.name;
  result.seed = config.seed;
  std::vector<Solution> valid;
  for (const auto& ind : population) {
    if (!ind.valid) continue;
    Solution s;
    if (auto it = in_pool.find(key_of(ind.genes)); it != in_pool.end()) s.pool_index = it->second;
    s.values.assign(ind.genes.begin(), ind.genes.end());
    s.goals = ind.goals;
    s.valid = true;
    valid.push_back(std::move(s));
  }
  result.valid_fraction = static_cast<double>(valid.size()) / static_cast<double>(population.size());
  if (valid.empty()) {
    result.status = RunStatus::no_valid_result;
    result.error = "no valid individual in the final population";
  } else {
    sort_solutions(valid, pool);
    result.selected.push_back(std::move(valid.front()));
  }
  result.log.y_evaluations = evaluator.count();
  result.wall_ms = elapsed_since(start);
  return result;
}

// --- CART --------------------------------------------------------------------

double RegressionTree::predict(const BitMatrix& bits, std::size_t row) const {
  require(!nodes.empty(), "tree is empty");
  std::size_t at = 0;
  while (nodes[at].column >= 0) {
    const auto& node = nodes[at];
    const double v = bits.get(row, static_cast<std::size_t>(node.column)) ? 1.0 : 0.0;
    at = static_cast<std::size_t>(v < node.threshold ? node.left : node.right);
  }
  return nodes[at].value;
}

std::size_t RegressionTree::leaves() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const Node& n) { return n.column < 0; }));
}

std::size_t RegressionTree::depth() const {
  std::size_t best = 0;
  std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    const auto& n = nodes[static_cast<std::size_t>(id)];
    if (n.column < 0) {
      best = std::max(best, d);
    } else {
      stack.push_back({n.left, d + 1});
      stack.push_back({n.right, d + 1});
    }
  }
  return best;
}

namespace {

void grow(RegressionTree& tree, int id, std::vector<std::size_t> members, const BitMatrix& bits,
          std::span<const std::size_t> rows, std::span<const double> targets, const CartConfig& config) {
  const std::size_t n = members.size();
  double sum = 0.0;
  double lo = targets[members.front()];
  double hi = lo;
  for (std::size_t m : members) {
    sum += targets[m];
    lo = std::min(lo, targets[m]);
    hi = std::max(hi, targets[m]);
  }
  auto& node = tree.nodes[static_cast<std::size_t>(id)];
  node.n = n;
  node.value = sum / static_cast<double>(n);
  if (n < config.min_split || lo == hi) return;

  // Squared error around the mean, split into the column's 0 and 1 sides.
  auto sse = [](double s, double sq, std::size_t k) {
    return k ? sq - s * s / static_cast<double>(k) : 0.0;
  };
  double sum_sq = 0.0;
  for (std::size_t m : members) sum_sq += targets[m] * targets[m];
  const double parent = sse(sum, sum_sq, n);

  int best_col = -1;
  double best_gain = 1e-12 * std::max(1.0, parent);
  for (std::size_t c = 0; c < bits.cols(); ++c) {
    double s1 = 0.0, q1 = 0.0;
    std::size_t k1 = 0;
    for (std::size_t m : members) {
      if (bits.get(rows[m], c)) {
        s1 += targets[m];
        q1 += targets[m] * targets[m];
        ++k1;
      }
    }
    if (k1 == 0 || k1 == n) continue;
    const double gain = parent - sse(s1, q1, k1) - sse(sum - s1, sum_sq - q1, n - k1);
    if (gain > best_gain) {
      best_gain = gain;
      best_col = static_cast<int>(c);
    }
  }
  if (best_col < 0) return;

  std::vector<std::size_t> left, right;
  for (std::size_t m : members) {
    (bits.get(rows[m], static_cast<std::size_t>(best_col)) ? right : left).push_back(m);
  }
  const int l = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  tree.nodes.emplace_back();
  auto& split = tree.nodes[static_cast<std::size_t>(id)];
  split.column = best_col;
  split.left = l;
  split.right = l + 1;
  grow(tree, l, std::move(left), bits, rows, targets, config);
  grow(tree, l + 1, std::move(right), bits, rows, targets, config);
}

}  // namespace

RegressionTree cart_fit(const BitMatrix& bits, std::span<const std::size_t> rows,
                        std::span<const double> targets, const CartConfig& config) {
  require(rows.size() == targets.size(), "one target per row is required");
  require(rows.size() >= 2, "regression needs at least two rows");
  for (double t : targets) require(std::isfinite(t), "targets must be finite");
  RegressionTree tree;
  tree.nodes.emplace_back();
  std::vector<std::size_t> members(rows.size());
  std::iota(members.begin(), members.end(), 0);
  grow(tree, 0, std::move(members), bits, rows, targets, config);
  return tree;
}

// --- FLASH -------------------------------------------------------------------

void FlashConfig::validate() const {
  require(m0 >= 2, "initial sample needs at least two rows");
  require(m0 < budget, "initial sample must be smaller than the budget");
}

std::size_t flash_acquire(const std::vector<std::vector<double>>& predictions,
                          std::span<const double> weights, std::span<const double> r) {
  require(!predictions.empty(), "no candidates to acquire from");
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    double score = 0.0;
    for (std::size_t g = 0; g < weights.size(); ++g) score += predictions[i][g] * weights[g] * r[g];
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return best;
}

RunResult flash_run(const CandidatePool& pool, const EncodedPool& encoded, const FlashConfig& config) {
  config.validate();
  require(pool.size() == encoded.size(), "encoding does not match pool");
  if (pool.size() == 0) throw Error(ErrorCode::empty_pool, "pool is empty");
  if (!pool.has_goals()) throw Error(ErrorCode::unsupported, "FLASH needs goal values for the pool");

  const auto start = std::chrono::steady_clock::now();
  Rng rng(config.seed);
  Evaluator evaluator(pool);
  const auto weights = pool.spec.weights();
  const std::size_t goals = pool.spec.size();

  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<std::size_t>(order));
  const std::size_t initial = std::min(config.m0, pool.size());
  std::vector<std::size_t> evaluated(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(initial));
  for (std::size_t i : evaluated) evaluator.evaluate(i);

  std::vector<std::size_t> open;
  while (evaluated.size() < config.budget && evaluated.size() < pool.size()) {
    open.clear();
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (!evaluator.evaluated(i)) open.push_back(i);
    }
    std::vector<std::vector<double>> predicted(open.size(), std::vector<double>(goals));
    for (std::size_t g = 0; g < goals; ++g) {
      std::vector<double> y;
      y.reserve(evaluated.size());
      for (std::size_t i : evaluated) y.push_back(pool.candidates[i].goals[g]);
      const auto tree = cart_fit(encoded.bits, evaluated, y);
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (std::size_t k = 0; k < open.size(); ++k) {
        predicted[k][g] = tree.predict(encoded.bits, open[k]);
        lo = std::min(lo, predicted[k][g]);
        hi = std::max(hi, predicted[k][g]);
      }
      for (auto& row : predicted) row[g] = hi > lo ? (row[g] - lo) / (hi - lo) : 0.0;
    }
    std::vector<double> r(goals);
    for (auto& x : r) x = rng.uniform();
    const std::size_t pick = open[flash_acquire(predicted, weights, r)];
    evaluator.evaluate(pick);
    evaluated.push_back(pick);
  }

  std::vector<Solution> seen;
  seen.reserve(evaluated.size());
  for (std::size_t i : evaluated) {
    Solution s;
    s.pool_index = i;
    s.values = pool.candidates[i].values;
    s.goals = pool.candidates[i].goals;
    s.valid = pool.candidates[i].valid;
    seen.push_back(std::move(s));
  }
  sort_solutions(seen, pool);

  RunResult result;
  result.algorithm = "flash";
  result.model = pool.name;
  result.seed = config.seed;
  result.selected.push_back(std::move(seen.front()));
  result.valid_fraction = result.selected.front().valid ? 1.0 : 0.0;
  result.log.y_evaluations = evaluator.count();
  result.wall_ms = elapsed_since(start);
  return result;
}

}  // namespace isneak
