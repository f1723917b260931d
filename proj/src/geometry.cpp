#include "isneak/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <json.hpp>
#include <numeric>
#include <optional>

#include "isneak/error.hpp"

namespace isneak {

double distance(std::span<const std::uint64_t> u, std::span<const std::uint64_t> v, std::size_t cols) {
  require(u.size() == v.size(), "distance needs equal-length vectors");
  if (cols == 0) return 0.0;
  std::size_t d = 0;
  for (std::size_t i = 0; i < u.size(); ++i) d += static_cast<std::size_t>(std::popcount(u[i] ^ v[i]));
  return static_cast<double>(d) / static_cast<double>(cols);
}

Poles pick_poles(std::span<const std::size_t> members, const Metric& metric, Rng& rng) {
  require(members.size() >= 2, "pole selection needs at least two members");
  const std::size_t pivot = members[rng.below(members.size())];

  auto furthest = [&](std::size_t from, double& best) {
    std::size_t arg = members[0];
    best = -1.0;
    for (std::size_t m : members) {
      const double d = metric(from, m);
      if (d > best) {
        best = d;
        arg = m;
      }
    }
    return arg;
  };

  double ignored = 0.0;
  Poles poles;
  poles.east = furthest(pivot, ignored);
  poles.west = furthest(poles.east, poles.c);
  return poles;
}

Poles poles_from(std::span<const std::size_t> members, std::size_t anchor, const Metric& metric) {
  require(!members.empty(), "pole selection needs members");
  Poles poles;
  poles.east = anchor;
  poles.west = anchor;
  poles.c = -1.0;
  for (std::size_t m : members) {
    const double d = metric(anchor, m);
    if (d > poles.c) {
      poles.c = d;
      poles.west = m;
    }
  }
  return poles;
}

double project(double a, double b, double c) {
  require(c > 0.0, "projection needs a positive pole distance");
  return (a * a + c * c - b * b) / (2.0 * c);
}

Split project_and_split(std::span<const std::size_t> members, const Poles& poles, const Metric& metric) {
  require(members.size() >= 2, "split needs at least two members");
  if (!(poles.c > 0.0)) throw Error(ErrorCode::contract, "unsplittable node: zero pole distance");

  Split split;
  split.x.reserve(members.size());
  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(members.size());
  for (std::size_t m : members) {
    const double x = project(metric(m, poles.east), metric(m, poles.west), poles.c);
    split.x.push_back(x);
    order.emplace_back(x, m);
  }
  std::sort(order.begin(), order.end());
  const std::size_t half = members.size() / 2;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < half ? split.east : split.west).push_back(order[i].second);
  }
  std::sort(split.east.begin(), split.east.end());
  std::sort(split.west.begin(), split.west.end());
  return split;
}

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double mean_entropy(std::span<const std::uint32_t> ones, std::size_t n) {
  if (ones.empty() || n == 0) return 0.0;
  double total = 0.0;
  for (std::uint32_t k : ones) total += binary_entropy(static_cast<double>(k) / static_cast<double>(n));
  return total / static_cast<double>(ones.size());
}

std::vector<std::uint32_t> column_counts(std::span<const std::size_t> members, const BitMatrix& bits) {
  std::vector<std::uint32_t> ones(bits.cols(), 0);
  for (std::size_t m : members) {
    const auto row = bits.row(m);
    for (std::size_t w = 0; w < row.size(); ++w) {
      std::uint64_t word = row[w];
      while (word) {
        const int bit = std::countr_zero(word);
        ++ones[w * 64 + static_cast<std::size_t>(bit)];
        word &= word - 1;
      }
    }
  }
  return ones;
}

std::size_t ClusterTree::internal_nodes() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const ClusterNode& n) { return !n.leaf(); }));
}

std::size_t ClusterTree::max_depth() const {
  int d = 0;
  for (const auto& n : nodes) d = std::max(d, n.depth);
  return static_cast<std::size_t>(d);
}

ClusterTree build_tree(const BitMatrix& bits, std::span<const std::size_t> members, Rng& rng) {
  require(members.size() >= 4, "tree construction needs at least four candidates");
  ClusterTree tree;
  tree.root_count = members.size();
  tree.stop_size = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(members.size()))));
  const double stop = std::sqrt(static_cast<double>(members.size()));
  Metric metric(bits);

  ClusterNode root;
  root.members.assign(members.begin(), members.end());
  std::sort(root.members.begin(), root.members.end());
  tree.nodes.push_back(std::move(root));
  // A child keeps the parent pole that fell on its side as its east pole.
  std::vector<std::optional<std::size_t>> anchor{std::nullopt};

  // Breadth-first expansion keeps node ids stable and ordered by depth.
  for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
    ClusterNode& node = tree.nodes[id];
    node.ones = column_counts(node.members, bits);
    node.entropy = mean_entropy(node.ones, node.members.size());
    if (node.members.size() < 2) {
      node.east = node.west = node.members.front();
      continue;
    }
    const Poles poles =
        anchor[id] ? poles_from(node.members, *anchor[id], metric) : pick_poles(node.members, metric, rng);
    node.east = poles.east;
    node.west = poles.west;
    node.c = poles.c;
    if (static_cast<double>(node.members.size()) < stop || !(poles.c > 0.0)) continue;

    Split split = project_and_split(node.members, poles, metric);
    auto holds = [](const std::vector<std::size_t>& sorted, std::size_t x) -> std::optional<std::size_t> {
      if (std::binary_search(sorted.begin(), sorted.end(), x)) return x;
      return std::nullopt;
    };
    anchor.push_back(holds(split.east, poles.east));
    anchor.push_back(holds(split.west, poles.west));
    const int depth = node.depth;
    const int parent = static_cast<int>(id);
    ClusterNode east_node;
    east_node.members = std::move(split.east);
    east_node.depth = depth + 1;
    east_node.parent = parent;
    ClusterNode west_node;
    west_node.members = std::move(split.west);
    west_node.depth = depth + 1;
    west_node.parent = parent;
    tree.nodes[id].east_child = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(std::move(east_node));
    tree.nodes[id].west_child = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(std::move(west_node));
  }
  return tree;
}

ClusterTree build_tree(const BitMatrix& bits, Rng& rng) {
  std::vector<std::size_t> all(bits.rows());
  std::iota(all.begin(), all.end(), 0);
  return build_tree(bits, all, rng);
}

std::string tree_json(const ClusterTree& tree) {
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
    const auto& n = tree.nodes[id];
    nlohmann::json j{{"id", id},
                     {"depth", n.depth},
                     {"size", n.members.size()},
                     {"entropy", n.entropy},
                     {"east", n.east},
                     {"west", n.west},
                     {"c", n.c},
                     {"parent", n.parent}};
    if (!n.leaf()) j["children"] = {n.east_child, n.west_child};
    if (n.leaf()) j["members"] = n.members;
    if (!n.asked.empty()) j["asked"] = n.asked;
    nodes.push_back(std::move(j));
  }
  return nlohmann::json{{"root_count", tree.root_count}, {"nodes", nodes}}.dump(2);
}

}  // namespace isneak
