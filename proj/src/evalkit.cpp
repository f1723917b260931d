#include "isneak/evalkit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include "isneak/baselines.hpp"
#include "isneak/error.hpp"
#include "isneak/ranking.hpp"
#include "isneak/serialize.hpp"

namespace isneak {

namespace fs = std::filesystem;

RankedPool rank_all(const CandidatePool& pool) {
  if (!pool.has_goals()) throw Error(ErrorCode::contract, "every candidate needs goal values to be ranked");
  std::vector<Solution> all;
  all.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    Solution s;
    s.pool_index = i;
    s.goals = pool.candidates[i].goals;
    all.push_back(std::move(s));
  }
  sort_solutions(all, pool);
  RankedPool ranked;
  ranked.order.reserve(all.size());
  ranked.index_of.assign(all.size(), 0);
  for (std::size_t k = 0; k < all.size(); ++k) {
    ranked.order.push_back(*all[k].pool_index);
    ranked.index_of[*all[k].pool_index] = k;
  }
  return ranked;
}

double d2h(std::size_t candidate, const RankedPool& ranked) {
  require(candidate < ranked.index_of.size(), "candidate is not in the ranked pool");
  return static_cast<double>(ranked.index_of[candidate]) / static_cast<double>(ranked.size());
}

double d2h_external(std::span<const double> goals, const CandidatePool& pool, const RankedPool& ranked) {
  require(ranked.size() == pool.size() && ranked.size() > 0, "ranking does not match pool");
  const GoalView x = make_view(pool, goals);
  std::size_t lo = 0;
  std::size_t hi = ranked.size();
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    const GoalView z = make_view(pool, pool.candidates[ranked.order[mid]].goals);
    if (!zitzler_worse(x, z)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return static_cast<double>(lo) / static_cast<double>(ranked.size());
}

double result_d2h(const RunResult& result, const CandidatePool& pool, const RankedPool& ranked) {
  const Solution* best = result.best();
  if (!best) return 1.0;
  if (best->pool_index) return d2h(*best->pool_index, ranked);
  return d2h_external(best->goals, pool, ranked);
}

std::size_t hamlet_samples(double confidence, double p) {
  require(confidence >= 0.0 && confidence < 1.0, "confidence must lie in [0, 1)");
  require(p > 0.0 && p < 1.0, "p must lie in (0, 1)");
  if (confidence == 0.0) return 0;
  const double n = std::log(1.0 - confidence) / std::log(1.0 - p);
  // Guard against a quotient landing a hair above an exact integer.
  const double rounded = std::round(n);
  if (std::fabs(n - rounded) < 1e-9) return static_cast<std::size_t>(rounded);
  return static_cast<std::size_t>(std::ceil(n));
}

LoadedModel prepare_model(std::string id, CandidatePool pool) {
  LoadedModel m;
  m.id = std::move(id);
  auto shared = std::make_shared<const CandidatePool>(std::move(pool));
  m.encoded = std::make_shared<const EncodedPool>(encode_pool(*shared));
  if (shared->has_goals()) m.ranked = std::make_shared<const RankedPool>(rank_all(*shared));
  m.pool = std::move(shared);
  return m;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
}

std::vector<ModelSource> discover_models(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(ErrorCode::io, "not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<ModelSource> out;
  for (const auto& f : files) {
    const std::string name = f.filename().string();
    const std::string ext = f.extension().string();
    const std::string stem = f.stem().string();
    if (stem.find('.') != std::string::npos) continue;  // sidecars such as x.features.csv
    ModelSource src;
    src.id = stem;
    src.path = f;
    src.objectives = dir / (stem + ".objectives.json");
    if (!fs::exists(src.objectives)) continue;
    if (ext == ".dimacs" || ext == ".cnf") {
      src.kind = ModelSource::Kind::cnf;
      src.features = dir / (stem + ".features.csv");
      if (!fs::exists(src.features)) continue;
    } else if (ext == ".csv") {
      src.kind = ModelSource::Kind::table;
    } else {
      continue;
    }
    out.push_back(std::move(src));
  }
  return out;
}

CandidatePool load_source(const ModelSource& source, std::size_t pool_size, std::uint64_t seed) {
  ObjectiveSpec spec = parse_objectives_json(read_file(source.objectives));
  if (source.kind == ModelSource::Kind::table) {
    return load_candidate_table(read_file(source.path), spec, source.id);
  }
  auto model = std::make_shared<CnfModel>(parse_dimacs(read_file(source.path), source.id));
  load_feature_values(spec, read_file(source.features), *model);
  return enumerate_valid(std::move(model), spec, pool_size, seed);
}

RunResult run_algorithm(const std::string& algorithm, const LoadedModel& model, std::uint64_t seed,
                        const AlgorithmOptions& options) {
  if (algorithm == "isneak") {
    AutoOracle oracle(model.encoded->scheme, seed);
    RunConfig config;
    config.seed = seed;
    config.question_cap = options.question_cap;
    RunResult r = run_isneak(model.pool, model.encoded, oracle, config);
    if (const Solution* best = r.best(); best && best->pool_index) {
      if (auto score = oracle.rate(model.encoded->value_of[*best->pool_index])) r.ratings.push_back(*score);
    }
    return r;
  }
  if (algorithm == "flash") {
    FlashConfig config;
    config.seed = seed;
    return flash_run(*model.pool, *model.encoded, config);
  }
  if (algorithm == "nga") {
    NgaConfig config;
    config.seed = seed;
    return nga_run(*model.pool, config);
  }
  throw Error(ErrorCode::bad_request, "unknown algorithm: " + algorithm);
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

template <class Fn>
void parallel_for(std::size_t jobs, std::size_t workers, Fn fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, jobs);
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (std::size_t j = next++; j < jobs; j = next++) fn(j);
  };
  if (workers <= 1) {
    loop();
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(loop);
  for (auto& t : pool) t.join();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

BenchReport bench(std::span<const LoadedModel> models, const BenchConfig& config) {
  require(config.repeats > 0, "repeats must be positive");
  struct Job {
    std::size_t model;
    std::string algorithm;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t m = 0; m < models.size(); ++m) {
    for (const auto& alg : config.algorithms) {
      for (std::size_t r = 0; r < config.repeats; ++r) jobs.push_back({m, alg, config.seed0 + r});
    }
  }

  BenchReport report;
  report.rows.resize(jobs.size());
  parallel_for(jobs.size(), config.workers, [&](std::size_t j) {
    const Job& job = jobs[j];
    const LoadedModel& model = models[job.model];
    BenchRow& row = report.rows[j];
    row.model = model.id;
    row.algorithm = job.algorithm;
    row.seed = job.seed;
    try {
      if (!model.ranked) throw Error(ErrorCode::unsupported, "model has no goal values to rank");
      const RunResult r = run_algorithm(job.algorithm, model, job.seed);
      row.ok = r.status == RunStatus::complete;
      row.error = r.error;
      row.d2h = result_d2h(r, *model.pool, *model.ranked);
      row.interactions = r.log.count();
      std::vector<double> sizes(r.log.sizes.begin(), r.log.sizes.end());
      row.median_s = median(sizes);
      row.valid_fraction = r.valid_fraction;
      row.y_evaluations = r.log.y_evaluations;
      row.ms = r.wall_ms;
      if (!config.json_dir.empty()) {
        const auto name = model.id + "-" + job.algorithm + "-s" + std::to_string(job.seed) + ".json";
        write_file(config.json_dir / name, result_json(r, *model.pool, &model.encoded->scheme).dump(2) + "\n");
      }
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
  });

  std::map<std::pair<std::string, std::string>, std::vector<const BenchRow*>> groups;
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& row : report.rows) {
    auto key = std::make_pair(row.model, row.algorithm);
    if (!groups.count(key)) keys.push_back(key);
    groups[key].push_back(&row);
  }
  for (const auto& key : keys) {
    BenchSummary s;
    s.model = key.first;
    s.algorithm = key.second;
    std::vector<double> d, i, sz, v, y, ms;
    for (const BenchRow* row : groups[key]) {
      if (!row->ok) {
        ++s.failed;
        continue;
      }
      ++s.runs;
      d.push_back(row->d2h);
      i.push_back(static_cast<double>(row->interactions));
      sz.push_back(row->median_s);
      v.push_back(row->valid_fraction);
      y.push_back(static_cast<double>(row->y_evaluations));
      ms.push_back(row->ms);
    }
    if (s.runs) {
      s.median_d2h = median(d);
      s.median_interactions = median(i);
      s.median_s = median(sz);
      s.median_valid_fraction = median(v);
      s.median_y_evaluations = median(y);
      s.median_ms = median(ms);
    }
    report.summaries.push_back(s);
  }
  return report;
}

std::string BenchReport::csv(bool with_timing) const {
  std::string out = "model,algorithm,seed,d2h,I,median_S,valid_fraction,y_evals,ms\n";
  for (const auto& r : rows) {
    out += r.model + "," + r.algorithm + "," + std::to_string(r.seed) + ",";
    if (r.ok) {
      out += fmt(r.d2h) + "," + std::to_string(r.interactions) + "," + fmt(r.median_s) + "," +
             fmt(r.valid_fraction) + "," + std::to_string(r.y_evaluations) + ",";
    } else {
      out += "failed,,,,,";
    }
    out += (with_timing ? fmt(r.ms) : std::string()) + "\n";
  }
  return out;
}

std::string BenchReport::summary_csv(bool with_timing) const {
  std::string out = "model,algorithm,runs,failed,median_d2h,median_I,median_S,valid_fraction,y_evals,ms\n";
  for (const auto& s : summaries) {
    out += s.model + "," + s.algorithm + "," + std::to_string(s.runs) + "," + std::to_string(s.failed) + "," +
           fmt(s.median_d2h) + "," + fmt(s.median_interactions) + "," + fmt(s.median_s) + "," +
           fmt(s.median_valid_fraction) + "," + fmt(s.median_y_evaluations) + "," +
           (with_timing ? fmt(s.median_ms) : std::string()) + "\n";
  }
  return out;
}

std::vector<SweepPoint> sweep_S(const LoadedModel& model, std::span<const std::size_t> s_values,
                                std::size_t repeats, std::uint64_t seed0, std::size_t workers) {
  require(repeats > 0, "repeats must be positive");
  const std::size_t attrs = model.pool->attributes.size();
  for (std::size_t s : s_values) require(s >= 1 && s <= attrs, "question sizes must lie in [1, attribute count]");
  std::vector<double> counts(s_values.size() * repeats, 0.0);
  parallel_for(counts.size(), workers, [&](std::size_t j) {
    AlgorithmOptions options;
    options.question_cap = s_values[j / repeats];
    const RunResult r = run_algorithm("isneak", model, seed0 + j % repeats, options);
    counts[j] = static_cast<double>(r.log.count());
  });
  std::vector<SweepPoint> out;
  for (std::size_t k = 0; k < s_values.size(); ++k) {
    std::vector<double> slice(counts.begin() + static_cast<std::ptrdiff_t>(k * repeats),
                              counts.begin() + static_cast<std::ptrdiff_t>((k + 1) * repeats));
    out.push_back({s_values[k], median(std::move(slice)), repeats});
  }
  return out;
}

}  // namespace isneak
