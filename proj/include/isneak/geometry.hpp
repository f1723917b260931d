#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "isneak/preprocess.hpp"
#include "isneak/rng.hpp"

namespace isneak {

/// Normalized Hamming distance between two packed rows of `cols` columns.
double distance(std::span<const std::uint64_t> u, std::span<const std::uint64_t> v, std::size_t cols);

/// Distance oracle over the rows of one matrix, counting calls.
class Metric {
 public:
  explicit Metric(const BitMatrix& bits) : bits_(bits) {}

  double operator()(std::size_t a, std::size_t b) const {
    ++calls_;
    if (bits_.cols() == 0) return 0.0;
    return static_cast<double>(bits_.hamming(a, b)) / static_cast<double>(bits_.cols());
  }
  std::size_t calls() const { return calls_; }
  const BitMatrix& bits() const { return bits_; }

 private:
  const BitMatrix& bits_;
  mutable std::size_t calls_ = 0;
};

struct Poles {
  std::size_t east = 0;
  std::size_t west = 0;
  double c = 0.0;
};

/// Random pivot, east = furthest from pivot, west = furthest from east.
/// Costs exactly 2 * members.size() distance calls.
Poles pick_poles(std::span<const std::size_t> members, const Metric& metric, Rng& rng);

/// Poles with a fixed east pole: west = member furthest from `anchor`.
/// Costs members.size() distance calls.
Poles poles_from(std::span<const std::size_t> members, std::size_t anchor, const Metric& metric);

struct Projection {
  double a = 0.0;  // distance to east
  double b = 0.0;  // distance to west
  double c = 0.0;  // east-west distance
  double x = 0.0;  // position on the east->west line
};

/// Cosine-rule position x = (a^2 + c^2 - b^2) / (2c). Requires c > 0.
double project(double a, double b, double c);

struct Split {
  std::vector<std::size_t> east;
  std::vector<std::size_t> west;
  std::vector<double> x;  // positions, in the order of the input members
};

/// Median split on projected position; ties resolved by row index. The lower
/// half (floor(n/2) members) goes east. Throws ErrorCode::contract when c == 0.
Split project_and_split(std::span<const std::size_t> members, const Poles& poles, const Metric& metric);

double binary_entropy(double p);

/// Mean per-column binary entropy given per-column counts of true values.
double mean_entropy(std::span<const std::uint32_t> ones, std::size_t n);

std::vector<std::uint32_t> column_counts(std::span<const std::size_t> members, const BitMatrix& bits);

inline constexpr int kNoNode = -1;

struct ClusterNode {
  std::vector<std::size_t> members;  // row indices, ascending
  std::size_t east = 0;
  std::size_t west = 0;
  double c = 0.0;
  int depth = 1;
  double entropy = 0.0;
  std::vector<std::uint32_t> ones;   // per-column true counts over members
  int parent = kNoNode;
  int east_child = kNoNode;
  int west_child = kNoNode;
  std::set<std::size_t> asked;       // attributes presented from this node
  bool pruned = false;               // removed by a search; members are dead

  bool leaf() const { return east_child == kNoNode; }
};

struct ClusterTree {
  std::vector<ClusterNode> nodes;  // nodes[0] is the root
  std::size_t root_count = 0;
  std::size_t stop_size = 0;       // nodes smaller than this are leaves

  const ClusterNode& root() const { return nodes.front(); }
  std::size_t internal_nodes() const;
  std::size_t max_depth() const;
};

/// Recursive FASTMAP bi-clustering. Recursion stops below sqrt(root count)
/// members or at zero-diameter nodes. Each child reuses the parent pole on its
/// side as its own east pole, so a node's two children are represented by
/// the node's own (maximally separated) poles.
ClusterTree build_tree(const BitMatrix& bits, std::span<const std::size_t> members, Rng& rng);
ClusterTree build_tree(const BitMatrix& bits, Rng& rng);

std::string tree_json(const ClusterTree& tree);

}  // namespace isneak
