#pragma once

#include <optional>
#include <set>
#include <span>
#include <vector>

#include "isneak/geometry.hpp"
#include "isneak/model.hpp"
#include "isneak/preprocess.hpp"

namespace isneak {

/// Goal vector scaled to 0..1 with pool bounds, plus direction weights
/// (+1 maximize, -1 minimize).
struct GoalView {
  std::vector<double> normalized;
  std::vector<double> weights;

  std::size_t n_goals() const { return normalized.size(); }
};

/// Constant goals (min == max) map to 0.5. Values outside the bounds are
/// clamped so out-of-pool candidates stay comparable.
GoalView make_view(std::span<const double> raw, std::span<const GoalBounds> bounds,
                   std::span<const double> weights);
GoalView make_view(const CandidatePool& pool, std::span<const double> raw);

/// Pareto dominance: no weighted goal worse, at least one strictly better.
bool boolean_dominates(const GoalView& x, const GoalView& y);

/// sum_j -exp(w_j (o(x)_j - o(y)_j) / divisor)
double zitzler_loss(const GoalView& x, const GoalView& y, double divisor);

/// True when x loses more than y under continuous domination.
bool zitzler_worse(const GoalView& x, const GoalView& y);

/// Continuous domination with a preference-support term: n goal terms and one
/// support term, each scaled by 1/(n+1). Support is maximized.
double pref_loss(const GoalView& x, const GoalView& y, double p_x, double p_y);
bool pref_worse(const GoalView& x, const GoalView& y, double p_x, double p_y);

/// Information gain (bits) of a binary column about a binary label, from counts:
/// n members, n_pos of them labelled 1; ones members with the column set,
/// ones_pos of those labelled 1.
double information_gain(std::size_t n, std::size_t n_pos, std::size_t ones, std::size_t ones_pos);

/// Ranks every column of `bits` by information gain about `labels` (one label
/// per member, 0 or 1). Descending gain, ties by ascending column.
std::vector<std::size_t> infogain_rank(std::span<const std::size_t> members,
                                       std::span<const std::uint8_t> labels, const BitMatrix& bits);

enum class Choice { a, b };

struct Question {
  int id = 0;
  int node = kNoNode;
  std::size_t item_a = 0;  // representative of the east half
  std::size_t item_b = 0;  // representative of the west half
  std::vector<AttrValue> option_a;
  std::vector<AttrValue> option_b;
  std::vector<std::size_t> attribute_ids;
  std::size_t candidate_attributes = 0;  // differing attributes, asked or not
  std::size_t open_attributes = 0;       // differing attributes never asked

  std::size_t size() const { return attribute_ids.size(); }
  double open() const;
};

inline constexpr std::size_t kDefaultQuestionSize = 6;

/// Contrasts the east poles of the node's two children on the most
/// informative attributes where they differ and that were never asked.
/// Child column counts in the tree must reflect the current members.
std::optional<Question> build_question(const ClusterTree& tree, int node, const EncodedPool& pool,
                                       const std::set<std::size_t>& asked,
                                       std::size_t cap = kDefaultQuestionSize);

/// Fraction of half members holding at least one of the selected values.
double half_support(std::span<const std::size_t> half, std::span<const AttrValue> selected,
                    const EncodedPool& pool);

}  // namespace isneak
