#include <doctest.h>

#include <cmath>
#include <limits>

#include "fixtures.hpp"
#include "isneak/baselines.hpp"
#include "isneak/error.hpp"

using namespace isneak;

namespace {

BitMatrix rows_matrix(const std::vector<std::vector<int>>& rows) {
  BitMatrix m(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) m.set(r, c, rows[r][c] != 0);
  }
  return m;
}

double sse(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("regression tree") {
  SUBCASE("constant target is a single leaf") {
    const auto bits = rows_matrix({{0, 1}, {1, 0}, {1, 1}, {0, 0}, {1, 0}});
    const std::vector<std::size_t> rows{0, 1, 2, 3, 4};
    const std::vector<double> y(5, 7.5);
    const auto tree = cart_fit(bits, rows, y);
    CHECK(tree.leaves() == 1);
    CHECK(tree.predict(bits, 2) == 7.5);
  }
  SUBCASE("target equal to a column splits once with no error") {
    const auto bits = rows_matrix({{0, 1, 0}, {1, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 0, 0}});
    const std::vector<std::size_t> rows{0, 1, 2, 3, 4, 5};
    std::vector<double> y;
    for (std::size_t r : rows) y.push_back(bits.get(r, 0) ? 3.0 : 1.0);
    const auto tree = cart_fit(bits, rows, y);
    CHECK(tree.depth() == 1);
    CHECK(tree.nodes[0].column == 0);
    for (std::size_t i = 0; i < rows.size(); ++i) CHECK(tree.predict(bits, rows[i]) == y[i]);
  }
  SUBCASE("root split and leaf means match an exhaustive search") {
    const auto bits = rows_matrix({{1, 0, 1, 0}, {1, 1, 0, 0}, {0, 1, 1, 1}, {0, 0, 0, 1},
                                   {1, 0, 0, 1}, {0, 1, 0, 0}, {1, 1, 1, 1}, {0, 0, 1, 0}});
    const std::vector<std::size_t> rows{0, 1, 2, 3, 4, 5, 6, 7};
    const std::vector<double> y{9.0, 8.5, 2.0, 1.0, 7.0, 3.5, 8.0, 2.5};
    int best_col = -1;
    double best = sse(y);
    std::vector<double> best_left, best_right;
    for (int c = 0; c < 4; ++c) {
      std::vector<double> left, right;
      for (std::size_t r : rows) (bits.get(r, static_cast<std::size_t>(c)) ? right : left).push_back(y[r]);
      if (left.empty() || right.empty()) continue;
      const double s = sse(left) + sse(right);
      if (s < best - 1e-12) {
        best = s;
        best_col = c;
        best_left = left;
        best_right = right;
      }
    }
    CartConfig one_level;
    one_level.min_split = 9;  // the root only; children become leaves
    auto stump = cart_fit(bits, rows, y, CartConfig{4});
    REQUIRE(stump.nodes[0].column == best_col);
    const auto& root = stump.nodes[0];
    CHECK(stump.nodes[static_cast<std::size_t>(root.left)].value == doctest::Approx(mean_of(best_left)));
    CHECK(stump.nodes[static_cast<std::size_t>(root.right)].value == doctest::Approx(mean_of(best_right)));
    CHECK(cart_fit(bits, rows, y, one_level).leaves() == 1);
  }
  SUBCASE("leaf count never exceeds training rows") {
    Rng rng(4);
    BitMatrix bits(40, 10);
    std::vector<std::size_t> rows;
    std::vector<double> y;
    for (std::size_t r = 0; r < 40; ++r) {
      for (std::size_t c = 0; c < 10; ++c) bits.set(r, c, rng.coin());
      rows.push_back(r);
      y.push_back(rng.uniform());
    }
    const auto tree = cart_fit(bits, rows, y);
    CHECK(tree.leaves() <= 40);
    std::size_t covered = 0;
    for (const auto& n : tree.nodes) {
      if (n.column < 0) covered += n.n;
    }
    CHECK(covered == 40);
  }
}

TEST_CASE("acquisition") {
  SUBCASE("single maximized goal picks the highest prediction") {
    const std::vector<std::vector<double>> pred{{0.2}, {0.9}, {0.4}, {0.9}};
    const std::vector<double> w{1.0}, r{1.0};
    CHECK(flash_acquire(pred, w, r) == 1);
  }
  SUBCASE("positive scaling keeps the choice") {
    Rng rng(6);
    for (int t = 0; t < 50; ++t) {
      std::vector<std::vector<double>> pred(30, std::vector<double>(3));
      for (auto& g : pred) {
        for (auto& x : g) x = rng.uniform();
      }
      const std::vector<double> w{-1, 1, -1};
      const std::vector<double> r{rng.uniform(), rng.uniform(), rng.uniform()};
      auto scaled = pred;
      for (auto& g : scaled) {
        for (auto& x : g) x /= 970.0;
      }
      CHECK(flash_acquire(pred, w, r) == flash_acquire(scaled, w, r));
    }
  }
}

TEST_CASE("flash") {
  const auto m = fixtures::synthetic(64, 0.25, 2, 2000);
  FlashConfig config;
  config.seed = 3;
  const auto r = flash_run(*m.pool, *m.encoded, config);
  CHECK(r.log.y_evaluations == 120);
  CHECK(r.algorithm == "flash");
  REQUIRE(r.best());
  CHECK(r.best()->pool_index);
  const auto again = flash_run(*m.pool, *m.encoded, config);
  CHECK(again.best()->pool_index == r.best()->pool_index);
  FlashConfig bad;
  bad.m0 = 200;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("genetic algorithm") {
  const auto m = fixtures::synthetic(64, 0.5, 2, 500);
  NgaConfig config;
  config.seed = 4;
  const auto r = nga_run(*m.pool, config);
  CHECK(r.log.y_evaluations == 10000);
  CHECK(r.valid_fraction < 1.0);
  CHECK(r.algorithm == "nga");
  if (r.status == RunStatus::complete) {
    REQUIRE(r.best());
    CHECK(r.best()->valid);
    CHECK(check_validity(*m.pool->model, [&] {
      Bits b;
      for (double v : r.best()->values) b.push_back(v != 0);
      return b;
    }()));
  } else {
    CHECK(r.status == RunStatus::no_valid_result);
  }
  SUBCASE("reproducible") {
    const auto again = nga_run(*m.pool, config);
    CHECK(again.valid_fraction == r.valid_fraction);
    CHECK(again.selected.size() == r.selected.size());
  }
  SUBCASE("candidate tables are unsupported") {
    const auto table = fixtures::goal_pool({{1}, {2}}, {Direction::minimize});
    CHECK_THROWS_AS(nga_run(table, config), Error);
  }
  SUBCASE("bad rates are rejected") {
    NgaConfig bad;
    bad.crossover_rate = 1.5;
    CHECK_THROWS_AS(bad.validate(), Error);
  }
}
