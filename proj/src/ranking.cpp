#include "isneak/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "isneak/error.hpp"

namespace isneak {

GoalView make_view(std::span<const double> raw, std::span<const GoalBounds> bounds,
                   std::span<const double> weights) {
  require(raw.size() == bounds.size() && raw.size() == weights.size(),
          "goal vector, bounds and weights must have equal length");
  GoalView view;
  view.weights.assign(weights.begin(), weights.end());
  view.normalized.reserve(raw.size());
  for (std::size_t j = 0; j < raw.size(); ++j) {
    const double span = bounds[j].max - bounds[j].min;
    double v = span > 0.0 ? (raw[j] - bounds[j].min) / span : 0.5;
    view.normalized.push_back(std::clamp(v, 0.0, 1.0));
  }
  return view;
}

GoalView make_view(const CandidatePool& pool, std::span<const double> raw) {
  const auto w = pool.spec.weights();
  return make_view(raw, pool.goal_bounds, w);
}

namespace {
void check_dims(const GoalView& x, const GoalView& y) {
  require(x.n_goals() == y.n_goals() && x.weights.size() == x.n_goals() &&
              y.weights.size() == y.n_goals(),
          "goal views must share dimensions");
}
}  // namespace

bool boolean_dominates(const GoalView& x, const GoalView& y) {
  check_dims(x, y);
  bool better = false;
  for (std::size_t j = 0; j < x.n_goals(); ++j) {
    const double delta = x.weights[j] * (x.normalized[j] - y.normalized[j]);
    if (delta < 0.0) return false;
    if (delta > 0.0) better = true;
  }
  return better;
}

double zitzler_loss(const GoalView& x, const GoalView& y, double divisor) {
  double loss = 0.0;
  for (std::size_t j = 0; j < x.n_goals(); ++j) {
    loss -= std::exp(x.weights[j] * (x.normalized[j] - y.normalized[j]) / divisor);
  }
  return loss;
}

bool zitzler_worse(const GoalView& x, const GoalView& y) {
  check_dims(x, y);
  const auto n = static_cast<double>(x.n_goals());
  return zitzler_loss(x, y, n) > zitzler_loss(y, x, n);
}

double pref_loss(const GoalView& x, const GoalView& y, double p_x, double p_y) {
  const double divisor = static_cast<double>(x.n_goals()) + 1.0;
  return zitzler_loss(x, y, divisor) - std::exp((p_x - p_y) / divisor);
}

bool pref_worse(const GoalView& x, const GoalView& y, double p_x, double p_y) {
  check_dims(x, y);
  require(p_x >= 0.0 && p_x <= 1.0 && p_y >= 0.0 && p_y <= 1.0, "support must lie in [0, 1]");
  return pref_loss(x, y, p_x, p_y) > pref_loss(y, x, p_y, p_x);
}

namespace {
double label_entropy(std::size_t n, std::size_t pos) {
  if (n == 0) return 0.0;
  return binary_entropy(static_cast<double>(pos) / static_cast<double>(n));
}
}  // namespace

double information_gain(std::size_t n, std::size_t n_pos, std::size_t ones, std::size_t ones_pos) {
  if (n == 0) return 0.0;
  const std::size_t zeros = n - ones;
  const std::size_t zeros_pos = n_pos - ones_pos;
  const double nn = static_cast<double>(n);
  const double conditional = (static_cast<double>(ones) / nn) * label_entropy(ones, ones_pos) +
                             (static_cast<double>(zeros) / nn) * label_entropy(zeros, zeros_pos);
  return std::max(0.0, label_entropy(n, n_pos) - conditional);
}

std::vector<std::size_t> infogain_rank(std::span<const std::size_t> members,
                                       std::span<const std::uint8_t> labels, const BitMatrix& bits) {
  require(members.size() == labels.size(), "one label per member is required");
  std::size_t n_pos = 0;
  for (auto l : labels) n_pos += l ? 1 : 0;
  require(n_pos > 0 && n_pos < members.size(), "both labels must be present");

  std::vector<std::size_t> ones(bits.cols(), 0), ones_pos(bits.cols(), 0);
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t c = 0; c < bits.cols(); ++c) {
      if (bits.get(members[i], c)) {
        ++ones[c];
        if (labels[i]) ++ones_pos[c];
      }
    }
  }
  std::vector<double> gain(bits.cols());
  for (std::size_t c = 0; c < bits.cols(); ++c) {
    gain[c] = information_gain(members.size(), n_pos, ones[c], ones_pos[c]);
  }
  std::vector<std::size_t> order(bits.cols());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return gain[a] > gain[b]; });
  return order;
}

double Question::open() const {
  if (candidate_attributes == 0) return 0.0;
  return static_cast<double>(open_attributes) / static_cast<double>(candidate_attributes);
}

std::optional<Question> build_question(const ClusterTree& tree, int node, const EncodedPool& pool,
                                       const std::set<std::size_t>& asked, std::size_t cap) {
  require(cap >= 1, "question size cap must be positive");
  const auto& parent = tree.nodes.at(static_cast<std::size_t>(node));
  require(!parent.leaf(), "questions need a node with two children");
  const auto& east = tree.nodes[static_cast<std::size_t>(parent.east_child)];
  const auto& west = tree.nodes[static_cast<std::size_t>(parent.west_child)];
  const std::size_t item_a = east.east;
  const std::size_t item_b = west.east;

  const auto& scheme = pool.scheme;
  const std::size_t n_east = east.members.size();
  const std::size_t n = n_east + west.members.size();

  // Columns where the representatives differ, scored by gain about half
  // membership (east labelled 1).
  std::vector<std::pair<double, std::size_t>> ranked;
  std::set<std::size_t> differing;
  std::set<std::size_t> open_attrs;
  for (std::size_t c = 0; c < scheme.columns(); ++c) {
    if (pool.bits.get(item_a, c) == pool.bits.get(item_b, c)) continue;
    const std::size_t attr = scheme.column_attribute[c];
    differing.insert(attr);
    if (asked.count(attr)) continue;
    open_attrs.insert(attr);
    const std::size_t ones = east.ones[c] + west.ones[c];
    ranked.emplace_back(information_gain(n, n_east, ones, east.ones[c]), c);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });

  Question q;
  q.node = node;
  q.item_a = item_a;
  q.item_b = item_b;
  q.candidate_attributes = differing.size();
  q.open_attributes = open_attrs.size();
  for (const auto& [gain, column] : ranked) {
    if (q.attribute_ids.size() >= cap) break;
    const std::size_t attr = scheme.column_attribute[column];
    if (std::find(q.attribute_ids.begin(), q.attribute_ids.end(), attr) != q.attribute_ids.end()) continue;
    q.attribute_ids.push_back(attr);
    q.option_a.push_back({attr, pool.value_of[item_a][attr]});
    q.option_b.push_back({attr, pool.value_of[item_b][attr]});
  }
  if (q.attribute_ids.empty()) return std::nullopt;
  return q;
}

double half_support(std::span<const std::size_t> half, std::span<const AttrValue> selected,
                    const EncodedPool& pool) {
  require(!selected.empty(), "support needs at least one selected value");
  if (half.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t m : half) {
    for (const auto& av : selected) {
      if (pool.has(m, av)) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(half.size());
}

}  // namespace isneak
