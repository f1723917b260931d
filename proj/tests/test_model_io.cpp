#include <doctest.h>

#include <set>

#include "fixtures.hpp"
#include "isneak/error.hpp"
#include "isneak/model.hpp"
#include "isneak/sat.hpp"

using namespace isneak;

namespace {

// Independent clause walk used as the validity oracle.
bool brute_valid(const CnfModel& m, const Bits& bits) {
  for (const auto& clause : m.clauses) {
    bool sat = false;
    for (int lit : clause) {
      const bool v = bits[static_cast<std::size_t>(std::abs(lit) - 1)] != 0;
      if ((lit > 0) == v) sat = true;
    }
    if (!sat) return false;
  }
  return true;
}

std::size_t brute_count(const CnfModel& m) {
  std::size_t n = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m.num_vars); ++mask) {
    Bits b(m.num_vars);
    for (std::size_t v = 0; v < m.num_vars; ++v) b[v] = (mask >> v) & 1U;
    if (brute_valid(m, b)) ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("dimacs parses a minimal file") {
  const auto m = parse_dimacs("p cnf 3 2\n1 -2 0\n2 3 0\n");
  CHECK(m.num_vars == 3);
  REQUIRE(m.clauses.size() == 2);
  CHECK(m.clauses[0] == std::vector<int>{1, -2});
  CHECK(m.clauses[1] == std::vector<int>{2, 3});
  CHECK(m.var_names == std::vector<std::string>{"x1", "x2", "x3"});
}

TEST_CASE("dimacs unit clause admits only the forced assignment") {
  const auto m = parse_dimacs("p cnf 1 1\n1 0\n");
  auto pool = enumerate_valid(std::make_shared<const CnfModel>(m), ObjectiveSpec{}, 10, 1);
  REQUIRE(pool.size() == 1);
  CHECK(pool.candidates[0].values == std::vector<double>{1.0});
}

TEST_CASE("dimacs header with 128 variables") {
  std::string text = "c scrum-like\np cnf 128 1\n1 0\n";
  CHECK(parse_dimacs(text).num_vars == 128);
}

TEST_CASE("dimacs round trip keeps names and clauses") {
  const auto m = parse_dimacs("c var 1 root\nc var 2 gui\np cnf 2 2\n1 0\n-2 1 0\n");
  const auto again = parse_dimacs(write_dimacs(m));
  CHECK(again.num_vars == 2);
  CHECK(again.clauses == m.clauses);
  CHECK(again.var_names == std::vector<std::string>{"root", "gui"});
}

TEST_CASE("dimacs rejects malformed input") {
  CHECK_THROWS_AS(parse_dimacs("1 2 0\n"), Error);
  CHECK_THROWS_AS(parse_dimacs("p cnf 2 1\n3 0\n"), Error);
  CHECK_THROWS_AS(parse_dimacs("p cnf 2 1\n1 x 0\n"), Error);
}

TEST_CASE("validity checks") {
  CnfModel m;
  m.num_vars = 2;
  m.clauses = {{1, -2}};
  CHECK(check_validity(m, fixtures::bits_of({1, 1})));
  CHECK_FALSE(check_validity(m, fixtures::bits_of({0, 1})));

  CnfModel contra;
  contra.num_vars = 1;
  contra.clauses = {{1}, {-1}};
  CHECK_FALSE(check_validity(contra, fixtures::bits_of({0})));
  CHECK_FALSE(check_validity(contra, fixtures::bits_of({1})));

  CnfModel positive;
  positive.num_vars = 4;
  positive.clauses = {{1, 2}, {3}, {2, 4}, {1, 3, 4}};
  const auto all_true = fixtures::bits_of({1, 1, 1, 1});
  CHECK(check_validity(positive, all_true) == brute_valid(positive, all_true));
  CHECK(check_validity(positive, all_true));
}

TEST_CASE("validity agrees with a clause walk on random models") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    CnfModel m;
    m.num_vars = 6;
    for (int c = 0; c < 5; ++c) {
      std::vector<int> clause;
      for (int k = 0; k < 3; ++k) {
        const int v = 1 + static_cast<int>(rng.below(6));
        clause.push_back(rng.coin() ? v : -v);
      }
      m.clauses.push_back(clause);
    }
    Bits b(6);
    for (auto& x : b) x = rng.coin() ? 1 : 0;
    CHECK(check_validity(m, b) == brute_valid(m, b));
  }
}

TEST_CASE("enumeration of a two-variable model finds both completions") {
  const auto m = std::make_shared<const CnfModel>(parse_dimacs("p cnf 2 1\n1 0\n"));
  const auto pool = enumerate_valid(m, ObjectiveSpec{}, 10, 3);
  REQUIRE(pool.size() == 2);
  std::set<std::vector<double>> seen;
  for (const auto& c : pool.candidates) seen.insert(c.values);
  CHECK(seen == std::set<std::vector<double>>{{1, 1}, {1, 0}});
}

TEST_CASE("enumeration of an unsatisfiable model is an empty-pool error") {
  const auto m = std::make_shared<const CnfModel>(parse_dimacs("p cnf 1 2\n1 0\n-1 0\n"));
  try {
    enumerate_valid(m, ObjectiveSpec{}, 10, 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::empty_pool);
  }
}

TEST_CASE("enumeration is exhaustive, distinct and valid on small random models") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    CnfModel m;
    m.num_vars = 8;
    for (int v = 1; v <= 8; ++v) m.var_names.push_back("x" + std::to_string(v));
    for (int c = 0; c < 6; ++c) {
      std::vector<int> clause;
      for (int k = 0; k < 2; ++k) {
        const int v = 1 + static_cast<int>(rng.below(8));
        clause.push_back(rng.coin() ? v : -v);
      }
      m.clauses.push_back(clause);
    }
    const std::size_t expected = brute_count(m);
    if (expected == 0) continue;
    const auto pool = enumerate_valid(std::make_shared<const CnfModel>(m), ObjectiveSpec{}, 1000, seed);
    CHECK(pool.size() == expected);
    std::set<std::vector<double>> seen;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      CHECK(brute_valid(m, pool.bits(i)));
      seen.insert(pool.candidates[i].values);
    }
    CHECK(seen.size() == pool.size());
    CHECK(is_satisfiable(m));
  }
}

TEST_CASE("enumeration order depends on the seed, the set does not") {
  const auto sm = generate_synthetic_model(10, 0.5, 4);
  const auto m = std::make_shared<const CnfModel>(sm.model);
  const auto a = enumerate_valid(m, sm.spec, 100000, 1);
  const auto b = enumerate_valid(m, sm.spec, 100000, 2);
  REQUIRE(a.size() == brute_count(sm.model));
  std::set<std::vector<double>> sa, sb;
  for (const auto& c : a.candidates) sa.insert(c.values);
  for (const auto& c : b.candidates) sb.insert(c.values);
  CHECK(sa == sb);
}

TEST_CASE("synthetic models") {
  SUBCASE("125 features at ratio 0.25") {
    const auto sm = generate_synthetic_model(125, 0.25, 7);
    CHECK(sm.model.num_vars == 125);
    CHECK(sm.spec.size() == 4);
    CHECK(sm.spec.per_feature_values.size() == 125);
    CHECK(is_satisfiable(sm.model));
    const auto tree_only = generate_synthetic_model(125, 0.0, 7);
    CHECK(sm.model.clauses.size() >= tree_only.model.clauses.size() + 32);
  }
  SUBCASE("500 features at ratio 1.0") {
    const auto sm = generate_synthetic_model(500, 1.0, 3);
    CHECK(sm.model.num_vars == 500);
    CHECK(is_satisfiable(sm.model));
  }
  SUBCASE("ratio 0 keeps every enumerated assignment valid") {
    const auto sm = generate_synthetic_model(12, 0.0, 5);
    const auto pool = enumerate_valid(std::make_shared<const CnfModel>(sm.model), sm.spec, 100000, 1);
    CHECK(pool.size() == brute_count(sm.model));
    for (std::size_t i = 0; i < pool.size(); ++i) CHECK(pool.candidates[i].valid);
  }
  SUBCASE("same seed, same model") {
    CHECK(write_dimacs(generate_synthetic_model(64, 0.5, 9).model) ==
          write_dimacs(generate_synthetic_model(64, 0.5, 9).model));
  }
}

TEST_CASE("10,000 valid candidates from a 125-feature model") {
  const auto sm = generate_synthetic_model(125, 0.25, 7);
  const auto m = std::make_shared<const CnfModel>(sm.model);
  const auto pool = enumerate_valid(m, sm.spec, 10000, 0);
  REQUIRE(pool.size() == 10000);
  std::set<std::vector<double>> seen;
  for (std::size_t i = 0; i < pool.size(); i += 97) CHECK(check_validity(sm.model, pool.bits(i)));
  for (const auto& c : pool.candidates) seen.insert(c.values);
  CHECK(seen.size() == 10000);
}

TEST_CASE("candidate tables") {
  ObjectiveSpec spec = fixtures::spec_of({Direction::minimize, Direction::minimize});
  spec.goals[0].name = "cost";
  spec.goals[1].name = "defects";
  SUBCASE("two rows") {
    const auto pool = load_candidate_table("a,b,cost,defects\n1,x,10,3\n0,y,20,1\n", spec);
    REQUIRE(pool.size() == 2);
    CHECK(pool.attributes.size() == 2);
    CHECK(pool.attributes[0].kind == AttributeKind::boolean);
    CHECK(pool.attributes[1].kind == AttributeKind::categorical);
    CHECK(pool.goal_bounds[0].min == 10);
    CHECK(pool.goal_bounds[0].max == 20);
    CHECK(pool.goal_bounds[1].min == 1);
    CHECK(pool.goal_bounds[1].max == 3);
  }
  SUBCASE("constant goal") {
    const auto pool = load_candidate_table("a,cost,defects\n1.5,4,3\n2.5,4,1\n", spec);
    CHECK(pool.goal_bounds[0].min == pool.goal_bounds[0].max);
    CHECK(pool.attributes[0].kind == AttributeKind::numeric);
  }
  SUBCASE("missing goal column") {
    CHECK_THROWS_AS(load_candidate_table("a,cost\n1,2\n", spec), Error);
  }
  SUBCASE("non-numeric goal") {
    CHECK_THROWS_AS(load_candidate_table("a,cost,defects\n1,cheap,2\n", spec), Error);
  }
  SUBCASE("large table with nine decisions and four goals") {
    ObjectiveSpec four = fixtures::spec_of(
        {Direction::minimize, Direction::maximize, Direction::minimize, Direction::minimize});
    std::string text = "d0,d1,d2,d3,d4,d5,d6,d7,d8,g0,g1,g2,g3\n";
    Rng rng(5);
    for (int r = 0; r < 10000; ++r) {
      for (int d = 0; d < 9; ++d) text += std::to_string(rng.uniform()) + ",";
      text += std::to_string(rng.uniform()) + "," + std::to_string(rng.uniform()) + "," +
              std::to_string(rng.uniform()) + "," + std::to_string(rng.uniform()) + "\n";
    }
    const auto pool = load_candidate_table(text, four);
    CHECK(pool.size() == 10000);
    CHECK(pool.attributes.size() == 9);
  }
  SUBCASE("round trip") {
    const auto pool = load_candidate_table("a,b,cost,defects\n1,x,10,3\n0,y,20,1\n", spec);
    const auto again = load_candidate_table(write_candidate_table(pool), spec);
    CHECK(again.size() == 2);
    CHECK(again.candidates[1].goals == pool.candidates[1].goals);
  }
}

TEST_CASE("goal evaluation sums per-feature values") {
  ObjectiveSpec spec = fixtures::spec_of(
      {Direction::minimize, Direction::minimize, Direction::minimize, Direction::maximize});
  spec.per_feature_values = {{2, 3, 0, 1}, {1, 1, 1, 1}, {0.5, 0, 2, 4}};
  CHECK(evaluate_goals(fixtures::bits_of({0, 0, 0}), spec) == GoalVector{0, 0, 0, 0});
  CHECK(evaluate_goals(fixtures::bits_of({1, 0, 0}), spec) == GoalVector{2, 3, 0, 1});
  const auto two = evaluate_goals(fixtures::bits_of({1, 0, 1}), spec);
  GoalVector expected(4, 0.0);
  for (std::size_t j = 0; j < 4; ++j) expected[j] = spec.per_feature_values[0][j] + spec.per_feature_values[2][j];
  CHECK(two == expected);
}

TEST_CASE("objective sidecar round trip") {
  const auto spec = parse_objectives_json(
      R"({"objectives":[{"column":"cost","goal":"minimize"},{"column":"value","goal":"maximize"}]})");
  REQUIRE(spec.size() == 2);
  CHECK(spec.goals[1].direction == Direction::maximize);
  CHECK(parse_objectives_json(objectives_json(spec)).goals[0].name == "cost");
  CHECK_THROWS_AS(parse_objectives_json(R"({"objectives":[{"column":"c","goal":"sideways"}]})"), Error);
}

TEST_CASE("evaluator counts each pool candidate once") {
  auto pool = fixtures::goal_pool({{1}, {2}, {3}}, {Direction::minimize});
  Evaluator ev(pool);
  ev.evaluate(0);
  ev.evaluate(0);
  ev.evaluate(2);
  CHECK(ev.count() == 2);
  CHECK(ev.evaluated(2));
  CHECK_FALSE(ev.evaluated(1));
}
