#include "isneak/sat.hpp"

#include <algorithm>
#include <cstdlib>

#include "isneak/error.hpp"

namespace isneak {
namespace {

// Literal code: 2*var + sign, var 0-based, sign 1 for negative.
using Lit = std::uint32_t;

constexpr int kNoReason = -1;
constexpr std::int8_t kUnassigned = -1;

Lit encode(int dimacs) {
  const auto var = static_cast<Lit>(std::abs(dimacs) - 1);
  return 2 * var + (dimacs < 0 ? 1U : 0U);
}

int decode(Lit lit) {
  const int var = static_cast<int>(lit >> 1) + 1;
  return (lit & 1U) ? -var : var;
}

Lit negate(Lit lit) { return lit ^ 1U; }
std::uint32_t var_of(Lit lit) { return lit >> 1; }

class CdclSolver final : public SatBackend {
 public:
  explicit CdclSolver(std::size_t num_vars)
      : num_vars_(num_vars),
        watches_(2 * num_vars),
        assign_(num_vars, kUnassigned),
        level_(num_vars, 0),
        reason_(num_vars, kNoReason),
        seen_(num_vars, 0),
        order_pos_(num_vars, 0) {}

  void add_clause(std::span<const int> literals) override {
    if (unsat_) return;
    cancel_until(0);
    std::vector<Lit> clause;
    clause.reserve(literals.size());
    for (int raw : literals) {
      require(raw != 0 && static_cast<std::size_t>(std::abs(raw)) <= num_vars_,
              "literal out of range");
      const Lit lit = encode(raw);
      const int v = value(lit);
      if (v == 1) return;  // satisfied at the root
      if (v == 0) continue;
      if (std::find(clause.begin(), clause.end(), negate(lit)) != clause.end()) return;
      if (std::find(clause.begin(), clause.end(), lit) == clause.end()) clause.push_back(lit);
    }
    if (clause.empty()) {
      unsat_ = true;
      return;
    }
    if (clause.size() == 1) {
      enqueue(clause[0], kNoReason);
      if (propagate() != kNoReason) unsat_ = true;
      return;
    }
    attach(std::move(clause));
  }

  std::optional<Bits> solve(Rng& rng, std::vector<int>* decisions) override {
    if (unsat_) return std::nullopt;
    cancel_until(0);
    if (propagate() != kNoReason) {
      unsat_ = true;
      return std::nullopt;
    }

    order_.resize(num_vars_);
    for (std::uint32_t v = 0; v < num_vars_; ++v) order_[v] = v;
    rng.shuffle(std::span<std::uint32_t>(order_));
    for (std::size_t i = 0; i < order_.size(); ++i) order_pos_[order_[i]] = i;
    next_order_ = 0;

    for (;;) {
      const int conflict = propagate();
      if (conflict != kNoReason) {
        if (decision_level() == 0) {
          unsat_ = true;
          return std::nullopt;
        }
        std::vector<Lit> learnt;
        const int backjump = analyze(conflict, learnt);
        cancel_until(backjump);
        if (learnt.size() == 1) {
          enqueue(learnt[0], kNoReason);
        } else {
          const Lit asserting = learnt[0];
          const int idx = attach(std::move(learnt));
          enqueue(asserting, idx);
        }
        continue;
      }

      while (next_order_ < order_.size() && assign_[order_[next_order_]] != kUnassigned) {
        ++next_order_;
      }
      if (next_order_ == order_.size()) break;

      const std::uint32_t var = order_[next_order_];
      trail_lim_.push_back(trail_.size());
      enqueue(2 * var + (rng.coin() ? 1U : 0U), kNoReason);
    }

    Bits model(num_vars_);
    for (std::size_t v = 0; v < num_vars_; ++v) model[v] = assign_[v] == 1 ? 1 : 0;
    if (decisions) {
      decisions->clear();
      for (std::size_t start : trail_lim_) decisions->push_back(decode(trail_[start]));
    }
    return model;
  }

 private:
  int decision_level() const { return static_cast<int>(trail_lim_.size()); }

  // 1 true, 0 false, -1 unassigned.
  int value(Lit lit) const {
    const std::int8_t a = assign_[var_of(lit)];
    if (a == kUnassigned) return -1;
    return (lit & 1U) ? 1 - a : a;
  }

  void enqueue(Lit lit, int reason) {
    const auto v = var_of(lit);
    assign_[v] = (lit & 1U) ? 0 : 1;
    level_[v] = decision_level();
    reason_[v] = reason;
    trail_.push_back(lit);
  }

  int attach(std::vector<Lit> clause) {
    const int idx = static_cast<int>(clauses_.size());
    watches_[clause[0]].push_back(idx);
    watches_[clause[1]].push_back(idx);
    clauses_.push_back(std::move(clause));
    return idx;
  }

  // Returns the index of a conflicting clause, or kNoReason.
  int propagate() {
    while (qhead_ < trail_.size()) {
      const Lit falsified = negate(trail_[qhead_++]);
      auto& watchers = watches_[falsified];
      std::size_t keep = 0;
      for (std::size_t w = 0; w < watchers.size(); ++w) {
        const int ci = watchers[w];
        auto& c = clauses_[ci];
        if (c[0] == falsified) std::swap(c[0], c[1]);
        if (value(c[0]) == 1) {
          watchers[keep++] = ci;
          continue;
        }
        bool moved = false;
        for (std::size_t k = 2; k < c.size(); ++k) {
          if (value(c[k]) != 0) {
            std::swap(c[1], c[k]);
            watches_[c[1]].push_back(ci);
            moved = true;
            break;
          }
        }
        if (moved) continue;
        watchers[keep++] = ci;
        if (value(c[0]) == 0) {
          for (++w; w < watchers.size(); ++w) watchers[keep++] = watchers[w];
          watchers.resize(keep);
          qhead_ = trail_.size();
          return ci;
        }
        enqueue(c[0], ci);
      }
      watchers.resize(keep);
    }
    return kNoReason;
  }

  // First-UIP conflict analysis. Returns the backjump level; learnt[0] is the
  // asserting literal and learnt[1] (if any) has the backjump level.
  int analyze(int conflict, std::vector<Lit>& learnt) {
    learnt.assign(1, 0);
    int path_count = 0;
    Lit p = 0;
    bool have_p = false;
    std::size_t index = trail_.size();
    int clause_idx = conflict;
    do {
      const auto& c = clauses_[clause_idx];
      for (std::size_t j = have_p ? 1 : 0; j < c.size(); ++j) {
        const Lit q = c[j];
        const auto v = var_of(q);
        if (seen_[v] || level_[v] == 0) continue;
        seen_[v] = 1;
        if (level_[v] == decision_level()) {
          ++path_count;
        } else {
          learnt.push_back(q);
        }
      }
      do {
        --index;
      } while (!seen_[var_of(trail_[index])]);
      p = trail_[index];
      have_p = true;
      clause_idx = reason_[var_of(p)];
      seen_[var_of(p)] = 0;
      --path_count;
    } while (path_count > 0);
    learnt[0] = negate(p);

    int backjump = 0;
    std::size_t max_i = 1;
    for (std::size_t i = 1; i < learnt.size(); ++i) {
      seen_[var_of(learnt[i])] = 0;
      if (level_[var_of(learnt[i])] > backjump) {
        backjump = level_[var_of(learnt[i])];
        max_i = i;
      }
    }
    if (learnt.size() > 1) std::swap(learnt[1], learnt[max_i]);
    return backjump;
  }

  void cancel_until(int level) {
    if (decision_level() <= level) return;
    const std::size_t stop = trail_lim_[level];
    for (std::size_t i = trail_.size(); i > stop; --i) {
      const auto v = var_of(trail_[i - 1]);
      assign_[v] = kUnassigned;
      reason_[v] = kNoReason;
      if (!order_.empty() && order_pos_[v] < next_order_) next_order_ = order_pos_[v];
    }
    trail_.resize(stop);
    trail_lim_.resize(level);
    qhead_ = std::min(qhead_, trail_.size());
  }

  std::size_t num_vars_;
  std::vector<std::vector<Lit>> clauses_;
  std::vector<std::vector<int>> watches_;
  std::vector<std::int8_t> assign_;
  std::vector<int> level_;
  std::vector<int> reason_;
  std::vector<std::uint8_t> seen_;
  std::vector<Lit> trail_;
  std::vector<std::size_t> trail_lim_;
  std::size_t qhead_ = 0;
  std::vector<std::uint32_t> order_;
  std::vector<std::size_t> order_pos_;
  std::size_t next_order_ = 0;
  bool unsat_ = false;
};

}  // namespace

std::unique_ptr<SatBackend> make_sat_backend(std::size_t num_vars) {
  return std::make_unique<CdclSolver>(num_vars);
}

bool is_satisfiable(const CnfModel& model) {
  auto solver = make_sat_backend(model.num_vars);
  for (const auto& clause : model.clauses) solver->add_clause(clause);
  Rng rng(0);
  return solver->solve(rng).has_value();
}

}  // namespace isneak
