#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <initializer_list>
#include <string>

#include "isneak/error.hpp"
#include "isneak/model.hpp"
#include "isneak/rng.hpp"
#include "isneak/sat.hpp"

namespace isneak {
namespace {

constexpr int kMaxAttempts = 16;
constexpr int kRedrawsPerConstraint = 64;

enum class GroupKind { mandatory, optional, alternative, any_of };

// Checks whether the model stays satisfiable with extra clauses added.
class FeasibilityProbe {
 public:
  explicit FeasibilityProbe(const CnfModel& model) : model_(model) {}

  bool admits(std::initializer_list<std::vector<int>> extra) {
    auto solver = make_sat_backend(model_.num_vars);
    for (const auto& c : model_.clauses) solver->add_clause(c);
    for (const auto& c : extra) solver->add_clause(c);
    Rng rng(model_.clauses.size());
    return solver->solve(rng).has_value();
  }

 private:
  const CnfModel& model_;
};

struct FeatureTree {
  CnfModel model;
  std::vector<int> parent;  // by variable; 0 for the root
};

FeatureTree build_tree_model(std::size_t features, Rng& rng) {
  std::vector<int> parent_of(features + 1, 0);
  CnfModel model;
  model.num_vars = features;
  model.var_names.reserve(features);
  model.var_names.push_back("root");
  for (std::size_t v = 2; v <= features; ++v) model.var_names.push_back("f" + std::to_string(v));
  model.clauses.push_back({1});  // root is always selected

  std::deque<int> open{1};
  int next = 2;
  const int last = static_cast<int>(features);
  while (next <= last) {
    const int parent = open.front();
    open.pop_front();
    int remaining_children = std::min<int>(1 + static_cast<int>(rng.below(4)), last - next + 1);
    while (remaining_children > 0) {
      const double roll = rng.uniform();
      GroupKind kind = roll < 0.2   ? GroupKind::mandatory
                       : roll < 0.6 ? GroupKind::optional
                       : roll < 0.8 ? GroupKind::alternative
                                    : GroupKind::any_of;
      int size = 1;
      if (kind == GroupKind::alternative || kind == GroupKind::any_of) {
        if (remaining_children < 2) {
          kind = GroupKind::optional;
        } else {
          size = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(remaining_children - 1)));
        }
      }
      std::vector<int> members;
      for (int k = 0; k < size; ++k) members.push_back(next++);
      remaining_children -= size;

      for (int child : members) {
        model.clauses.push_back({-child, parent});
        parent_of[static_cast<std::size_t>(child)] = parent;
        open.push_back(child);
      }
      switch (kind) {
        case GroupKind::mandatory:
          model.clauses.push_back({-parent, members[0]});
          break;
        case GroupKind::optional:
          break;
        case GroupKind::alternative:
          for (std::size_t i = 0; i < members.size(); ++i) {
            for (std::size_t j = i + 1; j < members.size(); ++j) {
              model.clauses.push_back({-members[i], -members[j]});
            }
          }
          [[fallthrough]];
        case GroupKind::any_of: {
          std::vector<int> clause{-parent};
          clause.insert(clause.end(), members.begin(), members.end());
          model.clauses.push_back(std::move(clause));
          break;
        }
      }
    }
  }
  return {std::move(model), std::move(parent_of)};
}

bool related(const std::vector<int>& parent, int a, int b) {
  for (int x = parent[static_cast<std::size_t>(a)]; x; x = parent[static_cast<std::size_t>(x)]) {
    if (x == b) return true;
  }
  for (int x = parent[static_cast<std::size_t>(b)]; x; x = parent[static_cast<std::size_t>(x)]) {
    if (x == a) return true;
  }
  return false;
}

// Constraints join features in different subtrees and must leave both ends
// selectable, so a single draw cannot kill a whole branch.
bool add_cross_tree_constraints(CnfModel& model, const std::vector<int>& parent, std::size_t count,
                                Rng& rng) {
  FeasibilityProbe probe(model);
  const auto n = static_cast<std::uint64_t>(model.num_vars - 1);
  for (std::size_t added = 0; added < count; ++added) {
    bool placed = false;
    for (int attempt = 0; attempt < kRedrawsPerConstraint && !placed; ++attempt) {
      const int a = 2 + static_cast<int>(rng.below(n));
      int b = 2 + static_cast<int>(rng.below(n - 1));
      if (b >= a) ++b;
      if (related(parent, a, b)) continue;
      // requires: a -> b; excludes: not (a and b)
      std::vector<int> clause = rng.coin() ? std::vector<int>{-a, b} : std::vector<int>{-a, -b};
      if (probe.admits({clause, {a}}) && probe.admits({clause, {b}})) {
        model.clauses.push_back(std::move(clause));
        placed = true;
      }
    }
    if (!placed) return false;
  }
  return true;
}

}  // namespace

SyntheticModel generate_synthetic_model(std::size_t features, double constraint_ratio,
                                        std::uint64_t seed) {
  require(features >= 4, "synthetic models need at least 4 features");
  require(constraint_ratio >= 0.0 && constraint_ratio <= 1.5, "constraint ratio must lie in [0, 1.5]");
  const auto cross_tree =
      static_cast<std::size_t>(std::ceil(constraint_ratio * static_cast<double>(features) - 1e-9));

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng(seed + static_cast<std::uint64_t>(attempt) * 0x51ED27ULL);
    auto [model, parent] = build_tree_model(features, rng);
    if (!add_cross_tree_constraints(model, parent, cross_tree, rng)) continue;
    if (!is_satisfiable(model)) continue;

    char name[96];
    std::snprintf(name, sizeof name, "synthetic-%zu-%.2f-s%llu", features, constraint_ratio,
                  static_cast<unsigned long long>(seed));
    model.name = name;

    ObjectiveSpec spec;
    spec.goals = {{"effort", Direction::minimize},
                  {"cost", Direction::minimize},
                  {"defects", Direction::minimize},
                  {"success", Direction::maximize}};
    spec.per_feature_values.reserve(features);
    for (std::size_t v = 0; v < features; ++v) {
      spec.per_feature_values.push_back(
          {rng.uniform(1.0, 10.0), rng.uniform(0.0, 5.0), rng.uniform(0.0, 4.0),
           rng.uniform(0.0, 10.0)});
    }
    return {std::move(model), std::move(spec)};
  }
  throw Error(ErrorCode::generation_failure,
              "no satisfiable model after " + std::to_string(kMaxAttempts) + " attempts");
}

}  // namespace isneak
