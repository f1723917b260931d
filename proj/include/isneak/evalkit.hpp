#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "isneak/engine.hpp"
#include "isneak/model.hpp"
#include "isneak/preprocess.hpp"

namespace isneak {

/// All candidates sorted best to worst; index_of is the inverse permutation.
struct RankedPool {
  std::vector<std::size_t> order;
  std::vector<std::size_t> index_of;

  std::size_t size() const { return order.size(); }
};

/// Stable merge sort of the whole pool under the continuous-domination
/// comparator.
RankedPool rank_all(const CandidatePool& pool);

/// 0-based rank over pool size; 0 is best.
double d2h(std::size_t candidate, const RankedPool& ranked);

/// Rank of a goal vector that is not in the pool: its insertion point in the
/// ranked order (ahead of candidates it ties with), found by binary search,
/// over pool size.
double d2h_external(std::span<const double> goals, const CandidatePool& pool, const RankedPool& ranked);

/// d2h of a run's best solution; 1 when the run has none.
double result_d2h(const RunResult& result, const CandidatePool& pool, const RankedPool& ranked);

/// ceil(log(1 - c) / log(1 - p)); 0 when c == 0.
std::size_t hamlet_samples(double confidence, double p);

/// A model ready for benchmarking: the pool, its encoding and its ranking.
struct LoadedModel {
  std::string id;
  std::shared_ptr<const CandidatePool> pool;
  std::shared_ptr<const EncodedPool> encoded;
  std::shared_ptr<const RankedPool> ranked;
};

LoadedModel prepare_model(std::string id, CandidatePool pool);

/// A loadable model found on disk. CNF models (`<stem>.dimacs` or `.cnf`) need
/// `<stem>.objectives.json` and `<stem>.features.csv` beside them; candidate
/// tables (`<stem>.csv`) need `<stem>.objectives.json`.
struct ModelSource {
  enum class Kind { cnf, table };
  std::string id;
  Kind kind = Kind::cnf;
  std::filesystem::path path;
  std::filesystem::path objectives;
  std::filesystem::path features;  // cnf only
};

std::vector<ModelSource> discover_models(const std::filesystem::path& dir);

/// CNF sources are enumerated to `pool_size` candidates with `seed`; tables
/// are loaded whole.
CandidatePool load_source(const ModelSource& source, std::size_t pool_size, std::uint64_t seed);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

struct AlgorithmOptions {
  std::size_t question_cap = kDefaultQuestionSize;
};

/// Runs one algorithm ("isneak", "flash" or "nga") with a fresh seeded oracle.
RunResult run_algorithm(const std::string& algorithm, const LoadedModel& model, std::uint64_t seed,
                        const AlgorithmOptions& options = {});

struct BenchRow {
  std::string model;
  std::string algorithm;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  double d2h = 1.0;
  std::size_t interactions = 0;
  double median_s = 0.0;
  double valid_fraction = 0.0;
  std::size_t y_evaluations = 0;
  double ms = 0.0;
};

struct BenchSummary {
  std::string model;
  std::string algorithm;
  std::size_t runs = 0;
  std::size_t failed = 0;
  double median_d2h = 1.0;
  double median_interactions = 0.0;
  double median_s = 0.0;
  double median_valid_fraction = 0.0;
  double median_y_evaluations = 0.0;
  double median_ms = 0.0;
};

struct BenchConfig {
  std::vector<std::string> algorithms{"isneak", "flash", "nga"};
  std::size_t repeats = 20;
  std::uint64_t seed0 = 1;
  std::size_t workers = 0;               // 0: hardware concurrency
  std::filesystem::path json_dir;        // per-run result files when set
};

struct BenchReport {
  std::vector<BenchRow> rows;            // model, algorithm, seed order
  std::vector<BenchSummary> summaries;

  std::string csv(bool with_timing = true) const;
  std::string summary_csv(bool with_timing = true) const;
};

BenchReport bench(std::span<const LoadedModel> models, const BenchConfig& config);

double median(std::vector<double> values);

struct SweepPoint {
  std::size_t s = 0;
  double median_interactions = 0.0;
  std::size_t runs = 0;
};

std::vector<SweepPoint> sweep_S(const LoadedModel& model, std::span<const std::size_t> s_values,
                                std::size_t repeats, std::uint64_t seed0, std::size_t workers = 0);

}  // namespace isneak
