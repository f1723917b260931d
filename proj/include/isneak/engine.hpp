#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "isneak/geometry.hpp"
#include "isneak/model.hpp"
#include "isneak/preprocess.hpp"
#include "isneak/ranking.hpp"
#include "isneak/rng.hpp"

namespace isneak {

struct SubtreeScore {
  int node = kNoNode;
  std::size_t s_term = 0;
  double gain_east = 0.0;  // e0 - e1, clamped at 0
  double gain_west = 0.0;  // e0 - e2, clamped at 0
  double open = 0.0;
  int depth = 1;
  double score = 0.0;
};

/// Scores every internal node whose children are both still live by
/// S * (e0 - e1) * (e0 - e2) * open / d. Sorted by descending score, then id.
std::vector<SubtreeScore> score_subtrees(const ClusterTree& tree, const EncodedPool& pool,
                                         const std::set<std::size_t>& asked,
                                         std::size_t cap = kDefaultQuestionSize);

class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual Choice answer(const Question& question) = 0;
  /// 0..5 rating of a candidate's attribute values, when supported.
  virtual std::optional<int> rate(std::span<const std::uint32_t> value_of) {
    (void)value_of;
    return std::nullopt;
  }
};

/// Seeded priority oracle: every (attribute, value) pair gets a U[0,1)
/// priority; the option with the larger priority sum wins, ties go to A.
class AutoOracle final : public Oracle {
 public:
  AutoOracle(const EncodingScheme& scheme, std::uint64_t seed);

  Choice answer(const Question& question) override;
  std::optional<int> rate(std::span<const std::uint32_t> value_of) override;

  double priority(AttrValue av) const { return priorities_[av.attribute][av.value]; }
  void set_priority(AttrValue av, double p) { priorities_[av.attribute][av.value] = p; }

 private:
  std::vector<std::vector<double>> priorities_;
};

struct Interaction {
  Question question;
  Choice answer = Choice::a;
  double support_east = 0.0;
  double support_west = 0.0;
  bool pruned_east = false;
  std::size_t pruned = 0;
};

struct InteractionLog {
  std::vector<Interaction> interactions;
  std::vector<std::size_t> sizes;
  std::size_t y_evaluations = 0;

  std::size_t count() const { return interactions.size(); }
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::size_t question_cap = kDefaultQuestionSize;
  std::set<std::size_t> preasked;  // attributes treated as already asked
};

/// Pass 1: preference-guided pruning of the cluster tree. A resumable state
/// machine; `pending()` holds the next question until `answer()` is called.
class Pass1 {
 public:
  Pass1(const CandidatePool& pool, const EncodedPool& encoded, ClusterTree tree,
        const RunConfig& config, Evaluator& evaluator, Rng& rng);

  const std::optional<Question>& pending() const { return pending_; }
  void answer(Choice choice);
  bool finished() const { return finished_; }

  std::vector<std::size_t> survivors() const;
  std::size_t live_count() const { return live_count_; }
  const InteractionLog& log() const { return log_; }
  const ClusterTree& tree() const { return tree_; }
  const std::set<std::size_t>& asked() const { return asked_; }

 private:
  void advance();
  void prune(int node);
  void refresh_poles(int node);

  const CandidatePool& pool_;
  const EncodedPool& encoded_;
  ClusterTree tree_;
  RunConfig config_;
  Evaluator& evaluator_;
  Rng& rng_;
  std::vector<std::uint8_t> live_;
  std::size_t live_count_ = 0;
  std::set<std::size_t> asked_;
  std::optional<Question> pending_;
  InteractionLog log_;
  bool finished_ = false;
};

struct Pass1Outcome {
  std::vector<std::size_t> survivors;
  InteractionLog log;
};

Pass1Outcome pass1(const CandidatePool& pool, const EncodedPool& encoded, ClusterTree tree,
                   Oracle& oracle, const RunConfig& config, Evaluator& evaluator, Rng& rng);

/// Pass 2: recursive bi-clustering over the survivors that keeps the half
/// whose pole is not worse, until at most max(2, sqrt(n)) remain.
std::vector<std::size_t> pass2_sway(std::span<const std::size_t> survivors, const CandidatePool& pool,
                                    const EncodedPool& encoded, Evaluator& evaluator, Rng& rng);

struct Solution {
  std::optional<std::size_t> pool_index;
  std::vector<double> values;
  GoalVector goals;
  bool valid = true;
};

enum class RunStatus { complete, aborted, no_valid_result };

struct RunResult {
  std::string algorithm = "isneak";
  std::string model;
  std::uint64_t seed = 0;
  RunStatus status = RunStatus::complete;
  std::string error;
  std::vector<Solution> selected;  // best first
  InteractionLog log;
  std::size_t survivors = 0;       // candidates left after pass 1
  double valid_fraction = 1.0;
  double wall_ms = 0.0;
  std::vector<int> ratings;

  const Solution* best() const { return selected.empty() ? nullptr : &selected.front(); }
};

/// Sorts best first with the continuous-domination comparator (a stable merge
/// sort; the comparator is not guaranteed transitive).
void sort_solutions(std::vector<Solution>& solutions, const CandidatePool& pool);

/// The full two-pass search as a suspendable session. The constructor runs up
/// to the first question (or to completion when none is needed).
class Search {
 public:
  Search(std::shared_ptr<const CandidatePool> pool, std::shared_ptr<const EncodedPool> encoded,
         RunConfig config);

  bool awaiting() const { return !done_ && pass1_->pending().has_value(); }
  const Question& pending() const;
  void answer(Choice choice);
  void abort(const std::string& reason);

  bool done() const { return done_; }
  const RunResult& result() const;
  std::size_t live_count() const { return pass1_->live_count(); }
  std::size_t interactions() const { return pass1_->log().count(); }
  const ClusterTree& tree() const { return pass1_->tree(); }
  const CandidatePool& pool() const { return *pool_; }
  const EncodedPool& encoded() const { return *encoded_; }

 private:
  void maybe_finish();

  std::shared_ptr<const CandidatePool> pool_;
  std::shared_ptr<const EncodedPool> encoded_;
  RunConfig config_;
  Evaluator evaluator_;
  Rng rng_;
  std::unique_ptr<Pass1> pass1_;
  RunResult result_;
  bool done_ = false;
  double elapsed_ms_ = 0.0;
};

/// Drives a Search with `oracle` until done. Oracle exceptions abort the run;
/// the partial log is kept in the returned result.
RunResult run_isneak(std::shared_ptr<const CandidatePool> pool,
                     std::shared_ptr<const EncodedPool> encoded, Oracle& oracle,
                     const RunConfig& config);

}  // namespace isneak
