#include <doctest.h>

#include <cmath>
#include <set>

#include "fixtures.hpp"
#include "isneak/engine.hpp"
#include "isneak/error.hpp"
#include "isneak/evalkit.hpp"

using namespace isneak;

namespace {

const LoadedModel& scrum_like() {
  static const LoadedModel m = fixtures::synthetic(128, 0.25, 3, 10000);
  return m;
}

// Root with two children; the east child splits again into two leaves. Both
// internal nodes see the same gains and the same kind of question.
struct DepthFixture {
  CandidatePool pool;
  EncodedPool enc;
  ClusterTree tree;
};

DepthFixture depth_fixture() {
  DepthFixture f;
  // rows 0 and 4 differ on a0,a1; rows 0 and 2 differ on a2,a3
  f.pool = fixtures::bool_pool({{0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 1, 1}, {0, 0, 1, 1},
                                {1, 1, 0, 0}, {1, 1, 0, 0}, {1, 1, 0, 0}, {1, 1, 0, 0}},
                               {}, {});
  f.enc = encode_pool(f.pool);
  auto node = [&](std::vector<std::size_t> members, std::size_t east, int depth, double entropy) {
    ClusterNode n;
    n.members = std::move(members);
    n.east = east;
    n.west = n.members.back();
    n.depth = depth;
    n.entropy = entropy;
    n.ones = column_counts(n.members, f.enc.bits);
    return n;
  };
  f.tree.root_count = 8;
  f.tree.nodes = {node({0, 1, 2, 3, 4, 5, 6, 7}, 0, 1, 1.0), node({0, 1, 2, 3}, 0, 2, 0.5),
                  node({4, 5, 6, 7}, 4, 2, 0.5), node({0, 1}, 0, 3, 0.0), node({2, 3}, 2, 3, 0.0)};
  f.tree.nodes[0].east_child = 1;
  f.tree.nodes[0].west_child = 2;
  f.tree.nodes[1].east_child = 3;
  f.tree.nodes[1].west_child = 4;
  f.tree.nodes[1].parent = f.tree.nodes[2].parent = 0;
  f.tree.nodes[3].parent = f.tree.nodes[4].parent = 1;
  return f;
}

class ScriptedOracle final : public Oracle {
 public:
  explicit ScriptedOracle(Choice c) : choice_(c) {}
  Choice answer(const Question&) override { return choice_; }

 private:
  Choice choice_;
};

class FailingOracle final : public Oracle {
 public:
  Choice answer(const Question&) override {
    if (++calls_ > 2) throw std::runtime_error("oracle went away");
    return Choice::a;
  }

 private:
  int calls_ = 0;
};

}  // namespace

TEST_CASE("subtree scores") {
  auto f = depth_fixture();
  SUBCASE("equal gains score twice as high one level up") {
    const auto scores = score_subtrees(f.tree, f.enc, {});
    REQUIRE(scores.size() == 2);
    CHECK(scores[0].node == 0);
    CHECK(scores[1].node == 1);
    CHECK(scores[0].s_term == scores[1].s_term);
    CHECK(scores[0].score == doctest::Approx(2.0 * scores[1].score));
    CHECK(scores[0].score == doctest::Approx(2 * 0.5 * 0.5 * 1.0 / 1));
  }
  SUBCASE("no entropy gain scores zero") {
    for (auto& n : f.tree.nodes) n.entropy = 0.7;
    for (const auto& s : score_subtrees(f.tree, f.enc, {})) CHECK(s.score == 0.0);
  }
  SUBCASE("everything asked scores zero") {
    for (const auto& s : score_subtrees(f.tree, f.enc, {0, 1, 2, 3})) CHECK(s.score == 0.0);
  }
  SUBCASE("pruned children take a node out of the running") {
    f.tree.nodes[3].pruned = true;
    const auto scores = score_subtrees(f.tree, f.enc, {});
    REQUIRE(scores.size() == 1);
    CHECK(scores[0].node == 0);
  }
}

TEST_CASE("automatic oracle") {
  auto pool = fixtures::bool_pool({{1, 0}, {0, 1}}, {}, {});
  const auto enc = encode_pool(pool);
  AutoOracle oracle(enc.scheme, 4);
  Question q;
  q.option_a = {{0, 1}};
  q.option_b = {{1, 1}};
  oracle.set_priority({0, 1}, 0.9);
  oracle.set_priority({1, 1}, 0.1);
  CHECK(oracle.answer(q) == Choice::a);
  std::swap(q.option_a, q.option_b);
  CHECK(oracle.answer(q) == Choice::b);
  q.option_a = q.option_b;
  CHECK(oracle.answer(q) == Choice::a);

  AutoOracle x(enc.scheme, 9), y(enc.scheme, 9);
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t v = 0; v < 2; ++v) CHECK(x.priority({a, v}) == y.priority({a, v}));
  }
  const std::vector<std::uint32_t> values{1, 0};
  const auto rating = x.rate(values);
  REQUIRE(rating);
  CHECK(*rating >= 0);
  CHECK(*rating <= 5);
}

TEST_CASE("pass 1 on a 10,000 candidate pool") {
  const auto& m = scrum_like();
  Evaluator ev(*m.pool);
  Rng rng(1);
  AutoOracle oracle(m.encoded->scheme, 1);
  auto tree = build_tree(m.encoded->bits, rng);
  const auto out = pass1(*m.pool, *m.encoded, std::move(tree), oracle, RunConfig{}, ev, rng);
  CHECK(out.survivors.size() < 100);
  CHECK(out.log.count() >= 5);
  for (std::size_t s : out.log.sizes) CHECK(s <= 6);
  // two representatives per question at most
  CHECK(ev.count() <= 2 * out.log.count());
  std::set<std::size_t> asked;
  for (const auto& step : out.log.interactions) {
    for (std::size_t a : step.question.attribute_ids) CHECK(asked.insert(a).second);
  }
}

TEST_CASE("preference decides when goals tie") {
  // Every candidate has the same goals, so the support term alone decides.
  Rng noise(2);
  std::vector<std::vector<int>> rows;
  std::vector<std::vector<double>> goals;
  for (int r = 0; r < 64; ++r) {
    std::vector<int> row;
    for (int c = 0; c < 8; ++c) row.push_back(r < 32 ? 1 : 0);
    for (int c = 0; c < 8; ++c) row.push_back(noise.coin() ? 1 : 0);
    rows.push_back(row);
    goals.push_back({1.0, 2.0});
  }
  auto pool = std::make_shared<const CandidatePool>(
      fixtures::bool_pool(rows, goals, {Direction::minimize, Direction::maximize}));
  auto enc = std::make_shared<const EncodedPool>(encode_pool(*pool));
  for (Choice c : {Choice::a, Choice::b}) {
    ScriptedOracle oracle(c);
    const auto r = run_isneak(pool, enc, oracle, RunConfig{});
    REQUIRE(r.log.count() >= 1);
    for (const auto& step : r.log.interactions) CHECK(step.pruned_east == (step.support_east < step.support_west));
    // The first question splits the two blocks; the chosen block survives.
    const auto& first = r.log.interactions.front();
    CHECK(first.support_east != first.support_west);
    CHECK(first.pruned_east == (c == Choice::b));
  }
}

TEST_CASE("pre-asked attributes mean no questions") {
  const auto& m = scrum_like();
  RunConfig config;
  for (std::size_t a = 0; a < m.pool->attributes.size(); ++a) config.preasked.insert(a);
  Evaluator ev(*m.pool);
  Rng rng(1);
  AutoOracle oracle(m.encoded->scheme, 1);
  const auto out = pass1(*m.pool, *m.encoded, build_tree(m.encoded->bits, rng), oracle, config, ev, rng);
  CHECK(out.log.count() == 0);
  CHECK(out.survivors.size() == m.pool->size());
}

TEST_CASE("pass 2") {
  const auto& m = scrum_like();
  SUBCASE("100 survivors shrink to about ten") {
    std::vector<std::size_t> survivors;
    for (std::size_t i = 0; i < 100; ++i) survivors.push_back(i * 37);
    Evaluator ev(*m.pool);
    Rng rng(3);
    const auto selected = pass2_sway(survivors, *m.pool, *m.encoded, ev, rng);
    CHECK(selected.size() <= 10);
    CHECK(selected.size() >= 5);
    CHECK(ev.count() <= 2 * static_cast<std::size_t>(std::ceil(std::log2(100.0))));
    for (std::size_t s : selected) CHECK(std::find(survivors.begin(), survivors.end(), s) != survivors.end());
  }
  SUBCASE("two survivors are both returned") {
    const std::vector<std::size_t> two{5, 9};
    Evaluator ev(*m.pool);
    Rng rng(3);
    CHECK(pass2_sway(two, *m.pool, *m.encoded, ev, rng) == two);
  }
}

TEST_CASE("full search") {
  const auto& m = scrum_like();
  SUBCASE("selects about ten valid candidates") {
    AutoOracle oracle(m.encoded->scheme, 5);
    RunConfig config;
    config.seed = 5;
    const auto r = run_isneak(m.pool, m.encoded, oracle, config);
    CHECK(r.status == RunStatus::complete);
    CHECK(r.selected.size() >= 2);
    CHECK(r.selected.size() <= 12);
    CHECK(r.valid_fraction == 1.0);
    for (const auto& s : r.selected) {
      REQUIRE(s.pool_index);
      CHECK(check_validity(*m.pool->model, m.pool->bits(*s.pool_index)));
    }
    CHECK(r.log.y_evaluations <= 80);
  }
  SUBCASE("same seed twice gives the same result") {
    RunConfig config;
    config.seed = 8;
    AutoOracle o1(m.encoded->scheme, 8), o2(m.encoded->scheme, 8);
    const auto a = run_isneak(m.pool, m.encoded, o1, config);
    const auto b = run_isneak(m.pool, m.encoded, o2, config);
    REQUIRE(a.selected.size() == b.selected.size());
    for (std::size_t i = 0; i < a.selected.size(); ++i) CHECK(a.selected[i].pool_index == b.selected[i].pool_index);
    CHECK(a.log.sizes == b.log.sizes);
  }
  SUBCASE("suspended session agrees with the driven run") {
    RunConfig config;
    config.seed = 2;
    AutoOracle oracle(m.encoded->scheme, 2);
    const auto driven = run_isneak(m.pool, m.encoded, oracle, config);
    Search s(m.pool, m.encoded, config);
    std::size_t answered = 0;
    while (s.awaiting()) {
      CHECK(s.pending().id == static_cast<int>(answered));
      s.answer(oracle.answer(s.pending()));
      ++answered;
    }
    REQUIRE(s.done());
    CHECK(answered == driven.log.count());
    CHECK(s.result().selected.front().pool_index == driven.selected.front().pool_index);
    CHECK_THROWS_AS(s.answer(Choice::a), Error);
  }
  SUBCASE("oracle failure aborts and keeps the partial log") {
    FailingOracle oracle;
    const auto r = run_isneak(m.pool, m.encoded, oracle, RunConfig{});
    CHECK(r.status == RunStatus::aborted);
    CHECK(r.log.count() == 2);
    CHECK(r.error.find("oracle went away") != std::string::npos);
  }
  SUBCASE("tiny pools are rejected") {
    auto small = std::make_shared<const CandidatePool>(fixtures::goal_pool({{1}, {2}, {3}}, {Direction::minimize}));
    auto enc = std::make_shared<const EncodedPool>(encode_pool(*small));
    CHECK_THROWS_AS(Search(small, enc, RunConfig{}), Error);
  }
}

TEST_CASE("solution sorting") {
  std::vector<std::vector<double>> goals;
  for (double g : {5.0, 1.0, 4.0, 2.0, 3.0}) goals.push_back({g});
  const auto pool = fixtures::goal_pool(goals, {Direction::minimize});
  std::vector<Solution> sols;
  for (std::size_t i = 0; i < 5; ++i) sols.push_back({i, pool.candidates[i].values, pool.candidates[i].goals, true});
  sort_solutions(sols, pool);
  std::vector<double> order;
  for (const auto& s : sols) order.push_back(s.goals[0]);
  CHECK(order == std::vector<double>{1, 2, 3, 4, 5});
}
