#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "isneak/model.hpp"
#include "isneak/rng.hpp"

namespace isneak {

/// Incremental satisfiability backend. Clauses may be added between solves;
/// decision order and phase come from the caller's generator, so a swap of
/// backend can change enumeration order but never which assignments are valid.
class SatBackend {
 public:
  virtual ~SatBackend() = default;

  virtual void add_clause(std::span<const int> literals) = 0;

  /// Returns a full assignment (0/1 per variable) or nullopt when unsatisfiable.
  /// `decisions`, when given, receives the decision literals of that model.
  virtual std::optional<Bits> solve(Rng& rng, std::vector<int>* decisions = nullptr) = 0;
};

/// Conflict-driven clause-learning solver with two-watched-literal propagation.
std::unique_ptr<SatBackend> make_sat_backend(std::size_t num_vars);

bool is_satisfiable(const CnfModel& model);

}  // namespace isneak
