#pragma once

// Small hand-built pools shared by the unit suites.

#include <memory>
#include <string>
#include <vector>

#include "isneak/evalkit.hpp"
#include "isneak/model.hpp"
#include "isneak/preprocess.hpp"

namespace fixtures {

inline isneak::ObjectiveSpec spec_of(std::vector<isneak::Direction> dirs) {
  isneak::ObjectiveSpec spec;
  for (std::size_t j = 0; j < dirs.size(); ++j) spec.goals.push_back({"g" + std::to_string(j), dirs[j]});
  return spec;
}

// Boolean attributes a0..a{k-1}; one goal vector per row.
inline isneak::CandidatePool bool_pool(const std::vector<std::vector<int>>& rows,
                                       const std::vector<std::vector<double>>& goals,
                                       std::vector<isneak::Direction> dirs) {
  isneak::CandidatePool pool;
  pool.name = "fixture";
  pool.spec = spec_of(std::move(dirs));
  const std::size_t k = rows.empty() ? 0 : rows[0].size();
  for (std::size_t a = 0; a < k; ++a) pool.attributes.push_back({"a" + std::to_string(a), isneak::AttributeKind::boolean, {}});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    isneak::Candidate c;
    for (int v : rows[r]) c.values.push_back(v);
    if (!goals.empty()) c.goals = goals[r];
    pool.candidates.push_back(std::move(c));
  }
  pool.compute_goal_bounds();
  return pool;
}

// Goal-only pool: a single boolean attribute derived from the row index.
inline isneak::CandidatePool goal_pool(const std::vector<std::vector<double>>& goals,
                                       std::vector<isneak::Direction> dirs) {
  std::vector<std::vector<int>> rows;
  for (std::size_t r = 0; r < goals.size(); ++r) rows.push_back({static_cast<int>(r % 2)});
  return bool_pool(rows, goals, std::move(dirs));
}

inline isneak::LoadedModel synthetic(std::size_t features, double ratio, std::uint64_t seed, std::size_t count) {
  auto sm = isneak::generate_synthetic_model(features, ratio, seed);
  auto cnf = std::make_shared<const isneak::CnfModel>(sm.model);
  return isneak::prepare_model("synthetic-" + std::to_string(features),
                               isneak::enumerate_valid(cnf, sm.spec, count, 0));
}

inline isneak::Bits bits_of(std::initializer_list<int> v) {
  isneak::Bits b;
  for (int x : v) b.push_back(static_cast<std::uint8_t>(x));
  return b;
}

}  // namespace fixtures
