#include "isneak/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "isneak/error.hpp"

namespace isneak {

// --- scoring -----------------------------------------------------------------

std::vector<SubtreeScore> score_subtrees(const ClusterTree& tree, const EncodedPool& pool,
                                         const std::set<std::size_t>& asked, std::size_t cap) {
  std::vector<SubtreeScore> scores;
  for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
    const auto& node = tree.nodes[id];
    if (node.leaf() || node.pruned) continue;
    const auto& east = tree.nodes[static_cast<std::size_t>(node.east_child)];
    const auto& west = tree.nodes[static_cast<std::size_t>(node.west_child)];
    if (east.pruned || west.pruned) continue;

    SubtreeScore s;
    s.node = static_cast<int>(id);
    s.depth = node.depth;
    s.gain_east = std::max(0.0, node.entropy - east.entropy);
    s.gain_west = std::max(0.0, node.entropy - west.entropy);
    if (auto q = build_question(tree, s.node, pool, asked, cap)) {
      s.s_term = q->size();
      s.open = q->open();
    }
    s.score = static_cast<double>(s.s_term) * s.gain_east * s.gain_west * s.open /
              static_cast<double>(s.depth);
    scores.push_back(s);
  }
  std::stable_sort(scores.begin(), scores.end(),
                   [](const SubtreeScore& a, const SubtreeScore& b) { return a.score > b.score; });
  return scores;
}

// --- oracle ------------------------------------------------------------------

AutoOracle::AutoOracle(const EncodingScheme& scheme, std::uint64_t seed) {
  Rng rng(seed);
  priorities_.reserve(scheme.attributes.size());
  for (const auto& attr : scheme.attributes) {
    std::vector<double> p(attr.domain_size());
    for (auto& x : p) x = rng.uniform();
    priorities_.push_back(std::move(p));
  }
}

Choice AutoOracle::answer(const Question& question) {
  double a = 0.0;
  double b = 0.0;
  for (const auto& av : question.option_a) a += priority(av);
  for (const auto& av : question.option_b) b += priority(av);
  return b > a ? Choice::b : Choice::a;
}

std::optional<int> AutoOracle::rate(std::span<const std::uint32_t> value_of) {
  require(value_of.size() == priorities_.size(), "rating needs one value per attribute");
  double mass = 0.0;
  double best = 0.0;
  for (std::size_t a = 0; a < priorities_.size(); ++a) {
    mass += priorities_[a].at(value_of[a]);
    best += *std::max_element(priorities_[a].begin(), priorities_[a].end());
  }
  if (best <= 0.0) return 0;
  return static_cast<int>(std::lround(5.0 * mass / best));
}

// --- pass 1 ------------------------------------------------------------------

Pass1::Pass1(const CandidatePool& pool, const EncodedPool& encoded, ClusterTree tree,
             const RunConfig& config, Evaluator& evaluator, Rng& rng)
    : pool_(pool),
      encoded_(encoded),
      tree_(std::move(tree)),
      config_(config),
      evaluator_(evaluator),
      rng_(rng),
      live_(encoded.size(), 0),
      asked_(config.preasked) {
  for (std::size_t m : tree_.root().members) live_[m] = 1;
  live_count_ = tree_.root().members.size();
  advance();
}

std::vector<std::size_t> Pass1::survivors() const {
  std::vector<std::size_t> out;
  out.reserve(live_count_);
  for (std::size_t r = 0; r < live_.size(); ++r) {
    if (live_[r]) out.push_back(r);
  }
  return out;
}

void Pass1::advance() {
  pending_.reset();
  const double stop = std::sqrt(static_cast<double>(tree_.root_count));
  if (static_cast<double>(live_count_) < stop) {
    finished_ = true;
    return;
  }
  const auto scores = score_subtrees(tree_, encoded_, asked_, config_.question_cap);
  if (scores.empty() || !(scores.front().score > 0.0)) {
    finished_ = true;
    return;
  }
  pending_ = build_question(tree_, scores.front().node, encoded_, asked_, config_.question_cap);
  pending_->id = static_cast<int>(log_.count());
}

void Pass1::answer(Choice choice) {
  if (!pending_) throw Error(ErrorCode::conflict, "no question is awaiting an answer");
  Question q = std::move(*pending_);
  pending_.reset();

  auto& node = tree_.nodes[static_cast<std::size_t>(q.node)];
  const int east_id = node.east_child;
  const int west_id = node.west_child;
  const auto& selected = choice == Choice::a ? q.option_a : q.option_b;

  Interaction step;
  step.answer = choice;
  step.support_east = half_support(tree_.nodes[static_cast<std::size_t>(east_id)].members, selected, encoded_);
  step.support_west = half_support(tree_.nodes[static_cast<std::size_t>(west_id)].members, selected, encoded_);

  const GoalView east_view = make_view(pool_, evaluator_.evaluate(q.item_a));
  const GoalView west_view = make_view(pool_, evaluator_.evaluate(q.item_b));
  step.pruned_east = pref_worse(east_view, west_view, step.support_east, step.support_west);

  for (std::size_t attr : q.attribute_ids) {
    asked_.insert(attr);
    node.asked.insert(attr);
  }
  const int doomed = step.pruned_east ? east_id : west_id;
  step.pruned = tree_.nodes[static_cast<std::size_t>(doomed)].members.size();
  prune(doomed);

  log_.sizes.push_back(q.size());
  step.question = std::move(q);
  log_.interactions.push_back(std::move(step));
  log_.y_evaluations = evaluator_.count();
  advance();
}

void Pass1::prune(int id) {
  auto& doomed = tree_.nodes[static_cast<std::size_t>(id)];
  const std::vector<std::size_t> removed = doomed.members;
  const std::vector<std::uint32_t> removed_ones = doomed.ones;
  for (std::size_t m : removed) live_[m] = 0;
  live_count_ -= removed.size();

  // Mark the whole subtree dead.
  std::vector<int> stack{id};
  while (!stack.empty()) {
    auto& n = tree_.nodes[static_cast<std::size_t>(stack.back())];
    stack.pop_back();
    n.pruned = true;
    if (!n.leaf()) {
      stack.push_back(n.east_child);
      stack.push_back(n.west_child);
    }
  }

  // Ancestors lose those members; their statistics and poles follow.
  for (int a = doomed.parent; a != kNoNode; a = tree_.nodes[static_cast<std::size_t>(a)].parent) {
    auto& anc = tree_.nodes[static_cast<std::size_t>(a)];
    std::vector<std::size_t> kept;
    kept.reserve(anc.members.size() - removed.size());
    std::set_difference(anc.members.begin(), anc.members.end(), removed.begin(), removed.end(),
                        std::back_inserter(kept));
    anc.members = std::move(kept);
    for (std::size_t c = 0; c < anc.ones.size(); ++c) anc.ones[c] -= removed_ones[c];
    anc.entropy = mean_entropy(anc.ones, anc.members.size());
    refresh_poles(a);
  }
}

void Pass1::refresh_poles(int id) {
  auto& node = tree_.nodes[static_cast<std::size_t>(id)];
  if (node.members.empty()) return;
  if (live_[node.east] && live_[node.west]) return;
  if (node.members.size() < 2) {
    node.east = node.west = node.members.front();
    node.c = 0.0;
    return;
  }
  Metric metric(encoded_.bits);
  const Poles poles = pick_poles(node.members, metric, rng_);
  node.east = poles.east;
  node.west = poles.west;
  node.c = poles.c;
}

Pass1Outcome pass1(const CandidatePool& pool, const EncodedPool& encoded, ClusterTree tree,
                   Oracle& oracle, const RunConfig& config, Evaluator& evaluator, Rng& rng) {
  Pass1 state(pool, encoded, std::move(tree), config, evaluator, rng);
  while (state.pending()) state.answer(oracle.answer(*state.pending()));
  return {state.survivors(), state.log()};
}

// --- pass 2 ------------------------------------------------------------------

std::vector<std::size_t> pass2_sway(std::span<const std::size_t> survivors, const CandidatePool& pool,
                                    const EncodedPool& encoded, Evaluator& evaluator, Rng& rng) {
  require(!survivors.empty(), "pass 2 needs survivors");
  std::vector<std::size_t> members(survivors.begin(), survivors.end());
  std::sort(members.begin(), members.end());
  const double stop = std::max(2.0, std::sqrt(static_cast<double>(members.size())));
  Metric metric(encoded.bits);
  while (static_cast<double>(members.size()) > stop) {
    const Poles poles = pick_poles(members, metric, rng);
    if (!(poles.c > 0.0)) break;
    const GoalView east = make_view(pool, evaluator.evaluate(poles.east));
    const GoalView west = make_view(pool, evaluator.evaluate(poles.west));
    Split split = project_and_split(members, poles, metric);
    members = zitzler_worse(east, west) ? std::move(split.west) : std::move(split.east);
  }
  return members;
}

// --- results -----------------------------------------------------------------

void sort_solutions(std::vector<Solution>& solutions, const CandidatePool& pool) {
  std::vector<GoalView> views;
  views.reserve(solutions.size());
  for (const auto& s : solutions) views.push_back(make_view(pool, s.goals));
  std::vector<std::size_t> order(solutions.size());
  std::iota(order.begin(), order.end(), 0);

  // Bottom-up merge sort: element from the right run moves ahead only when
  // the left element is strictly worse.
  std::vector<std::size_t> buffer(order.size());
  for (std::size_t width = 1; width < order.size(); width *= 2) {
    for (std::size_t lo = 0; lo < order.size(); lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, order.size());
      const std::size_t hi = std::min(lo + 2 * width, order.size());
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (zitzler_worse(views[order[i]], views[order[j]])) {
          buffer[k++] = order[j++];
        } else {
          buffer[k++] = order[i++];
        }
      }
      while (i < mid) buffer[k++] = order[i++];
      while (j < hi) buffer[k++] = order[j++];
    }
    order.swap(buffer);
  }
  std::vector<Solution> sorted;
  sorted.reserve(solutions.size());
  for (std::size_t i : order) sorted.push_back(std::move(solutions[i]));
  solutions = std::move(sorted);
}

// --- search session ------------------------------------------------------------

Search::Search(std::shared_ptr<const CandidatePool> pool, std::shared_ptr<const EncodedPool> encoded,
               RunConfig config)
    : pool_(std::move(pool)),
      encoded_(std::move(encoded)),
      config_(std::move(config)),
      evaluator_(*pool_),
      rng_(config_.seed) {
  require(pool_ && encoded_, "search needs a pool and its encoding");
  require(pool_->size() == encoded_->size(), "encoding does not match pool");
  require(pool_->size() >= 16, "search needs at least 16 candidates");
  require(pool_->has_goals(), "search needs a goal source for every candidate");
  const auto start = std::chrono::steady_clock::now();
  result_.model = pool_->name;
  result_.seed = config_.seed;
  ClusterTree tree = build_tree(encoded_->bits, rng_);
  pass1_ = std::make_unique<Pass1>(*pool_, *encoded_, std::move(tree), config_, evaluator_, rng_);
  elapsed_ms_ += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  maybe_finish();
}

const Question& Search::pending() const {
  if (!awaiting()) throw Error(ErrorCode::conflict, "no question is awaiting an answer");
  return *pass1_->pending();
}

void Search::answer(Choice choice) {
  if (!awaiting()) throw Error(ErrorCode::conflict, "no question is awaiting an answer");
  const auto start = std::chrono::steady_clock::now();
  pass1_->answer(choice);
  elapsed_ms_ += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  maybe_finish();
}

void Search::abort(const std::string& reason) {
  if (done_) return;
  result_.status = RunStatus::aborted;
  result_.error = reason;
  result_.log = pass1_->log();
  result_.log.y_evaluations = evaluator_.count();
  result_.survivors = pass1_->live_count();
  result_.wall_ms = elapsed_ms_;
  done_ = true;
}

const RunResult& Search::result() const {
  if (!done_) throw Error(ErrorCode::not_found, "run has not finished");
  return result_;
}

void Search::maybe_finish() {
  if (done_ || !pass1_->finished()) return;
  const auto start = std::chrono::steady_clock::now();
  const auto survivors = pass1_->survivors();
  result_.survivors = survivors.size();
  const auto chosen = pass2_sway(survivors, *pool_, *encoded_, evaluator_, rng_);
  for (std::size_t idx : chosen) {
    Solution s;
    s.pool_index = idx;
    s.values = pool_->candidates[idx].values;
    s.goals = evaluator_.evaluate(idx);
    s.valid = pool_->candidates[idx].valid;
    result_.selected.push_back(std::move(s));
  }
  sort_solutions(result_.selected, *pool_);
  std::size_t valid = 0;
  for (const auto& s : result_.selected) valid += s.valid ? 1 : 0;
  result_.valid_fraction =
      result_.selected.empty() ? 0.0 : static_cast<double>(valid) / static_cast<double>(result_.selected.size());
  result_.log = pass1_->log();
  result_.log.y_evaluations = evaluator_.count();
  elapsed_ms_ += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  result_.wall_ms = elapsed_ms_;
  done_ = true;
}

RunResult run_isneak(std::shared_ptr<const CandidatePool> pool,
                     std::shared_ptr<const EncodedPool> encoded, Oracle& oracle,
                     const RunConfig& config) {
  Search search(std::move(pool), std::move(encoded), config);
  while (search.awaiting()) {
    Choice choice;
    try {
      choice = oracle.answer(search.pending());
    } catch (const std::exception& e) {
      search.abort(std::string("oracle failure: ") + e.what());
      break;
    }
    search.answer(choice);
  }
  return search.result();
}

}  // namespace isneak
