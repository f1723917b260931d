#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace isneak {

using Bits = std::vector<std::uint8_t>;
using GoalVector = std::vector<double>;

/// Boolean constraint model in conjunctive normal form. Literals are signed,
/// 1-based variable indices.
struct CnfModel {
  std::string name;
  std::size_t num_vars = 0;
  std::vector<std::vector<int>> clauses;
  std::vector<std::string> var_names;

  /// Throws ErrorCode::contract when an invariant is broken.
  void validate() const;
};

/// Parses DIMACS CNF. `c var <i> <name>` comment lines name variables;
/// unnamed variables default to x1..xn.
CnfModel parse_dimacs(std::string_view text, std::string name = {});
std::string write_dimacs(const CnfModel& model);

bool check_validity(const CnfModel& model, std::span<const std::uint8_t> bits);

enum class Direction { minimize, maximize };

struct Goal {
  std::string name;
  Direction direction = Direction::minimize;

  double weight() const { return direction == Direction::maximize ? 1.0 : -1.0; }
};

struct ObjectiveSpec {
  std::vector<Goal> goals;
  // per_feature_values[v][j]: contribution of variable v (0-based) to goal j.
  // Empty for CSV-backed pools.
  std::vector<std::vector<double>> per_feature_values;

  std::size_t size() const { return goals.size(); }
  std::vector<double> weights() const;
  std::size_t index_of(std::string_view goal) const;  // npos when absent
  void validate() const;
};

/// Sidecar format: {"objectives":[{"column":"cost","goal":"minimize"},...]}
ObjectiveSpec parse_objectives_json(std::string_view text);
std::string objectives_json(const ObjectiveSpec& spec);

/// Reads `feature,<goal>,<goal>...` rows into spec.per_feature_values.
void load_feature_values(ObjectiveSpec& spec, std::string_view csv_text, const CnfModel& model);
std::string feature_values_csv(const ObjectiveSpec& spec, const CnfModel& model);

/// Sum of per-feature values over the variables set true.
GoalVector evaluate_goals(std::span<const std::uint8_t> bits, const ObjectiveSpec& spec);

enum class AttributeKind { boolean, numeric, categorical };

struct Attribute {
  std::string name;
  AttributeKind kind = AttributeKind::boolean;
  std::vector<std::string> symbols;  // categorical only; values index into it
};

struct Candidate {
  std::vector<double> values;  // one per attribute; booleans are 0/1
  GoalVector goals;            // empty when the pool carries no goal source
  bool valid = true;
};

struct GoalBounds {
  double min = 0.0;
  double max = 0.0;
};

/// The universe a search prunes. Immutable once built; share via shared_ptr.
struct CandidatePool {
  std::string name;
  std::shared_ptr<const CnfModel> model;  // null for CSV pools
  ObjectiveSpec spec;
  std::vector<Attribute> attributes;
  std::vector<Candidate> candidates;
  std::vector<GoalBounds> goal_bounds;

  std::size_t size() const { return candidates.size(); }
  bool has_goals() const;
  void compute_goal_bounds();
  Bits bits(std::size_t index) const;
};

/// Enumerates up to `count` distinct valid assignments by blocking each
/// solution and re-solving. Goals are attached when the spec has a
/// per-feature table.
CandidatePool enumerate_valid(std::shared_ptr<const CnfModel> model, const ObjectiveSpec& spec,
                              std::size_t count, std::uint64_t seed);

CandidatePool load_candidate_table(std::string_view csv_text, const ObjectiveSpec& spec,
                                   std::string name = {});
std::string write_candidate_table(const CandidatePool& pool);

struct SyntheticModel {
  CnfModel model;
  ObjectiveSpec spec;
};

SyntheticModel generate_synthetic_model(std::size_t features, double constraint_ratio,
                                        std::uint64_t seed);

/// Per-run y-evaluation accounting. The first lookup of a pool candidate costs
/// one evaluation; repeats are free. Out-of-pool assignments always cost one.
class Evaluator {
 public:
  explicit Evaluator(const CandidatePool& pool);

  const GoalVector& evaluate(std::size_t index);
  GoalVector evaluate_bits(std::span<const std::uint8_t> bits);
  bool evaluated(std::size_t index) const { return seen_[index] != 0; }
  std::size_t count() const { return count_.load(); }

 private:
  const CandidatePool& pool_;
  std::vector<std::uint8_t> seen_;
  std::atomic<std::size_t> count_{0};
};

}  // namespace isneak
