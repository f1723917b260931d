#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "isneak/error.hpp"
#include "isneak/geometry.hpp"
#include "isneak/rng.hpp"

using namespace isneak;

namespace {

BitMatrix matrix(const std::vector<std::string>& rows) {
  BitMatrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) m.set(r, c, rows[r][c] == '1');
  }
  return m;
}

BitMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  BitMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) m.set(r, c, rng.coin());
  }
  return m;
}

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

}  // namespace

TEST_CASE("normalized hamming distance") {
  const auto m = matrix({"10101", "10101", "10011"});
  CHECK(distance(m.row(0), m.row(1), 5) == 0.0);
  CHECK(distance(m.row(0), m.row(2), 5) == doctest::Approx(0.4));
  const auto c = matrix({"10110010", "01001101"});
  CHECK(distance(c.row(0), c.row(1), 8) == 1.0);
  Metric metric(c);
  CHECK(metric(0, 1) == 1.0);
  CHECK(metric.calls() == 1);
}

TEST_CASE("pole selection") {
  SUBCASE("three two-bit members") {
    const auto m = matrix({"00", "11", "01"});
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
      Rng rng(seed);
      Metric metric(m);
      const auto members = iota(3);
      const auto p = pick_poles(members, metric, rng);
      CHECK(p.c == 1.0);
      CHECK(std::min(p.east, p.west) == 0);
      CHECK(std::max(p.east, p.west) == 1);
    }
  }
  SUBCASE("identical members have zero diameter") {
    const auto m = matrix({"0110", "0110", "0110"});
    Rng rng(1);
    Metric metric(m);
    const auto members = iota(3);
    CHECK(pick_poles(members, metric, rng).c == 0.0);
  }
  SUBCASE("cost is exactly two distance calls per member") {
    for (std::size_t n : {2u, 7u, 64u, 1000u}) {
      const auto m = random_matrix(n, 40, n);
      Rng rng(n);
      Metric metric(m);
      const auto members = iota(n);
      pick_poles(members, metric, rng);
      CHECK(metric.calls() == 2 * n);
    }
  }
  SUBCASE("anchored poles cost one call per member") {
    const auto m = random_matrix(50, 30, 2);
    Metric metric(m);
    const auto members = iota(50);
    const auto p = poles_from(members, 7, metric);
    CHECK(metric.calls() == 50);
    CHECK(p.east == 7);
    for (std::size_t i = 0; i < 50; ++i) CHECK(Metric(m)(7, i) <= p.c);
  }
}

TEST_CASE("cosine-rule projection") {
  CHECK(project(0.0, 10.0, 10.0) == 0.0);
  CHECK(project(3.0, 3.0, 4.0) == doctest::Approx(2.0));
  CHECK(project(6.0, 8.0, 10.0) == doctest::Approx(3.6));
}

TEST_CASE("median split ordering") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    Rng rng(seed);
    const std::size_t n = 2 + rng.below(200);
    const auto m = random_matrix(n, 24, seed * 7);
    Metric metric(m);
    const auto members = iota(n);
    const auto poles = pick_poles(members, metric, rng);
    if (poles.c == 0.0) continue;
    const auto split = project_and_split(members, poles, metric);
    CHECK(split.east.size() == n / 2);
    CHECK(split.west.size() == n - n / 2);
    double east_max = -1e300, west_min = 1e300;
    for (std::size_t i : split.east) east_max = std::max(east_max, split.x[i]);
    for (std::size_t i : split.west) west_min = std::min(west_min, split.x[i]);
    CHECK(east_max <= west_min);
    CHECK(std::is_sorted(split.east.begin(), split.east.end()));
    CHECK(std::is_sorted(split.west.begin(), split.west.end()));
  }
  const auto same = matrix({"01", "01"});
  Metric metric(same);
  const auto members = iota(2);
  CHECK_THROWS_AS(project_and_split(members, Poles{0, 1, 0.0}, metric), Error);
}

TEST_CASE("entropy") {
  CHECK(binary_entropy(0.5) == doctest::Approx(1.0));
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  const auto m = random_matrix(4000, 2, 5);
  BitMatrix with_constant(4000, 2);
  for (std::size_t r = 0; r < 4000; ++r) with_constant.set(r, 0, m.get(r, 0));
  const auto members = iota(4000);
  const auto ones = column_counts(members, with_constant);
  CHECK(binary_entropy(ones[0] / 4000.0) == doctest::Approx(1.0).epsilon(0.01));
  CHECK(ones[1] == 0);
  CHECK(mean_entropy(std::span<const std::uint32_t>(ones.data() + 1, 1), 4000) == 0.0);
}

TEST_CASE("cluster tree") {
  SUBCASE("10,000 rows give leaves smaller than 100") {
    const auto m = random_matrix(10000, 64, 3);
    Rng rng(1);
    const auto tree = build_tree(m, rng);
    CHECK(tree.stop_size == 100);
    for (const auto& node : tree.nodes) {
      if (node.leaf()) CHECK(node.members.size() < 100);
    }
  }
  SUBCASE("16 rows halve to leaves below 4") {
    const auto m = random_matrix(16, 32, 4);
    Rng rng(2);
    const auto tree = build_tree(m, rng);
    CHECK(tree.max_depth() >= 3);
    for (const auto& node : tree.nodes) {
      if (node.leaf()) CHECK(node.members.size() < 4);
    }
  }
  SUBCASE("children partition their parent and inherit its poles") {
    const auto m = random_matrix(500, 48, 9);
    Rng rng(3);
    const auto tree = build_tree(m, rng);
    for (const auto& node : tree.nodes) {
      if (node.leaf()) continue;
      const auto& e = tree.nodes[static_cast<std::size_t>(node.east_child)];
      const auto& w = tree.nodes[static_cast<std::size_t>(node.west_child)];
      std::vector<std::size_t> all = e.members;
      all.insert(all.end(), w.members.begin(), w.members.end());
      std::sort(all.begin(), all.end());
      CHECK(all == node.members);
      CHECK(e.depth == node.depth + 1);
      if (std::binary_search(e.members.begin(), e.members.end(), node.east)) CHECK(e.east == node.east);
      if (std::binary_search(w.members.begin(), w.members.end(), node.west)) CHECK(w.east == node.west);
      const auto ones = column_counts(node.members, m);
      CHECK(node.ones == ones);
      CHECK(node.entropy == doctest::Approx(mean_entropy(ones, node.members.size())));
    }
  }
  SUBCASE("identical rows stop the recursion") {
    BitMatrix m(40, 8);
    Rng rng(1);
    const auto tree = build_tree(m, rng);
    CHECK(tree.nodes.size() == 1);
  }
  SUBCASE("seeded builds are reproducible") {
    const auto m = random_matrix(300, 20, 6);
    Rng a(5), b(5);
    CHECK(tree_json(build_tree(m, a)) == tree_json(build_tree(m, b)));
  }
}
