#include "isneak.h"

#include <cstring>
#include <filesystem>
#include <sstream>
#include <string>

#include <json.hpp>

#include "isneak/error.hpp"
#include "isneak/evalkit.hpp"
#include "isneak/serialize.hpp"
#include "isneak/service.hpp"

struct isneak_model {
  isneak::CnfModel model;
  isneak::ObjectiveSpec spec;
};

struct isneak_pool {
  isneak::LoadedModel loaded;
};

struct isneak_session {
  std::shared_ptr<const isneak::EncodedPool> encoded;
  std::unique_ptr<isneak::Search> search;
};

struct isneak_service {
  std::unique_ptr<isneak::SessionService> service;
};

namespace {

thread_local std::string last_error;

int fail(int code, const std::string& message) {
  last_error = message;
  return code;
}

template <class Fn>
int guarded(Fn&& fn) {
  try {
    last_error.clear();
    fn();
    return ISNEAK_OK;
  } catch (const isneak::Error& e) {
    return fail(static_cast<int>(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(ISNEAK_ERR_PARSE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(ISNEAK_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(ISNEAK_ERR_INTERNAL, e.what());
  }
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void need(const void* p, const char* what) {
  if (!p) throw isneak::Error(isneak::ErrorCode::contract, std::string(what) + " must not be null");
}

std::string stem_of(const std::filesystem::path& p) { return p.stem().string(); }

}  // namespace

extern "C" {

const char* isneak_version(void) { return "0.1.0"; }

const char* isneak_last_error_message(void) { return last_error.c_str(); }

void isneak_string_free(char* s) { std::free(s); }

int isneak_model_generate(size_t features, double constraint_ratio, uint64_t seed, isneak_model** out) {
  return guarded([&] {
    need(out, "out");
    auto sm = isneak::generate_synthetic_model(features, constraint_ratio, seed);
    *out = new isneak_model{std::move(sm.model), std::move(sm.spec)};
  });
}

int isneak_model_load(const char* dimacs_path, const char* objectives_path, const char* features_path,
                      isneak_model** out) {
  return guarded([&] {
    need(dimacs_path, "dimacs_path");
    need(objectives_path, "objectives_path");
    need(out, "out");
    auto m = std::make_unique<isneak_model>();
    m->model = isneak::parse_dimacs(isneak::read_file(dimacs_path), stem_of(dimacs_path));
    m->spec = isneak::parse_objectives_json(isneak::read_file(objectives_path));
    if (features_path) isneak::load_feature_values(m->spec, isneak::read_file(features_path), m->model);
    *out = m.release();
  });
}

int isneak_model_write(const isneak_model* model, const char* dimacs_path, const char* objectives_path,
                       const char* features_path) {
  return guarded([&] {
    need(model, "model");
    need(dimacs_path, "dimacs_path");
    isneak::write_file(dimacs_path, isneak::write_dimacs(model->model));
    if (objectives_path) isneak::write_file(objectives_path, isneak::objectives_json(model->spec));
    if (features_path) isneak::write_file(features_path, isneak::feature_values_csv(model->spec, model->model));
  });
}

int isneak_model_num_vars(const isneak_model* model, size_t* out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    *out = model->model.num_vars;
  });
}

int isneak_model_num_clauses(const isneak_model* model, size_t* out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    *out = model->model.clauses.size();
  });
}

void isneak_model_free(isneak_model* model) { delete model; }

int isneak_pool_enumerate(const isneak_model* model, size_t count, uint64_t seed, isneak_pool** out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    auto cnf = std::make_shared<const isneak::CnfModel>(model->model);
    auto pool = isneak::enumerate_valid(cnf, model->spec, count, seed);
    *out = new isneak_pool{isneak::prepare_model(model->model.name, std::move(pool))};
  });
}

int isneak_pool_load_csv(const char* csv_path, const char* objectives_path, isneak_pool** out) {
  return guarded([&] {
    need(csv_path, "csv_path");
    need(objectives_path, "objectives_path");
    need(out, "out");
    const auto spec = isneak::parse_objectives_json(isneak::read_file(objectives_path));
    auto pool = isneak::load_candidate_table(isneak::read_file(csv_path), spec, stem_of(csv_path));
    *out = new isneak_pool{isneak::prepare_model(stem_of(csv_path), std::move(pool))};
  });
}

int isneak_pool_open(const char* path, size_t pool_size, uint64_t seed, isneak_pool** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    const std::filesystem::path p(path);
    if (!std::filesystem::exists(p)) throw isneak::Error(isneak::ErrorCode::io, "no such file: " + p.string());
    isneak::ModelSource src;
    src.id = stem_of(p);
    src.path = p;
    src.objectives = p.parent_path() / (src.id + ".objectives.json");
    if (p.extension() == ".csv") {
      src.kind = isneak::ModelSource::Kind::table;
    } else {
      src.kind = isneak::ModelSource::Kind::cnf;
      src.features = p.parent_path() / (src.id + ".features.csv");
    }
    *out = new isneak_pool{isneak::prepare_model(src.id, isneak::load_source(src, pool_size, seed))};
  });
}

int isneak_pool_write_csv(const isneak_pool* pool, const char* path) {
  return guarded([&] {
    need(pool, "pool");
    need(path, "path");
    isneak::write_file(path, isneak::write_candidate_table(*pool->loaded.pool));
  });
}

int isneak_pool_size(const isneak_pool* pool, size_t* out) {
  return guarded([&] {
    need(pool, "pool");
    need(out, "out");
    *out = pool->loaded.pool->size();
  });
}

int isneak_pool_attributes(const isneak_pool* pool, size_t* out) {
  return guarded([&] {
    need(pool, "pool");
    need(out, "out");
    *out = pool->loaded.pool->attributes.size();
  });
}

void isneak_pool_free(isneak_pool* pool) { delete pool; }

int isneak_run(const isneak_pool* pool, const char* algorithm, uint64_t seed, size_t question_cap,
               int with_timing, char** json_out) {
  return guarded([&] {
    need(pool, "pool");
    need(algorithm, "algorithm");
    need(json_out, "json_out");
    isneak::AlgorithmOptions options;
    if (question_cap) options.question_cap = question_cap;
    const auto r = isneak::run_algorithm(algorithm, pool->loaded, seed, options);
    auto doc = isneak::result_json(r, *pool->loaded.pool, &pool->loaded.encoded->scheme, with_timing != 0);
    if (pool->loaded.ranked) doc["d2h"] = isneak::result_d2h(r, *pool->loaded.pool, *pool->loaded.ranked);
    *json_out = dup(doc.dump(2));
  });
}

int isneak_pool_d2h(const isneak_pool* pool, const char* result_json, double* out) {
  return guarded([&] {
    need(pool, "pool");
    need(result_json, "result_json");
    need(out, "out");
    if (!pool->loaded.ranked) throw isneak::Error(isneak::ErrorCode::unsupported, "pool has no goals to rank");
    const auto doc = nlohmann::json::parse(result_json);
    const auto& selected = doc.at("selected");
    if (selected.empty()) {
      *out = 1.0;
      return;
    }
    const auto& best = selected.front();
    if (!best.at("pool_index").is_null()) {
      *out = isneak::d2h(best.at("pool_index").get<std::size_t>(), *pool->loaded.ranked);
      return;
    }
    const auto& spec = pool->loaded.pool->spec;
    std::vector<double> goals;
    for (const auto& g : spec.goals) goals.push_back(best.at("goals").at(g.name).get<double>());
    *out = isneak::d2h_external(goals, *pool->loaded.pool, *pool->loaded.ranked);
  });
}

int isneak_tree_json(const isneak_pool* pool, uint64_t seed, char** json_out) {
  return guarded([&] {
    need(pool, "pool");
    need(json_out, "json_out");
    isneak::Rng rng(seed);
    *json_out = dup(isneak::tree_json(isneak::build_tree(pool->loaded.encoded->bits, rng)));
  });
}

int isneak_hamlet_samples(double confidence, double p, size_t* out) {
  return guarded([&] {
    need(out, "out");
    *out = isneak::hamlet_samples(confidence, p);
  });
}

int isneak_session_start(const isneak_pool* pool, uint64_t seed, size_t question_cap, isneak_session** out) {
  return guarded([&] {
    need(pool, "pool");
    need(out, "out");
    isneak::RunConfig config;
    config.seed = seed;
    if (question_cap) config.question_cap = question_cap;
    auto s = std::make_unique<isneak_session>();
    s->encoded = pool->loaded.encoded;
    s->search = std::make_unique<isneak::Search>(pool->loaded.pool, pool->loaded.encoded, config);
    *out = s.release();
  });
}

int isneak_session_question(const isneak_session* session, char** json_out) {
  return guarded([&] {
    need(session, "session");
    need(json_out, "json_out");
    if (!session->search->awaiting()) {
      *json_out = dup("null");
      return;
    }
    *json_out = dup(isneak::question_json(session->search->pending(), session->encoded->scheme).dump());
  });
}

int isneak_session_answer(isneak_session* session, char choice) {
  return guarded([&] {
    need(session, "session");
    if (choice != 'A' && choice != 'B' && choice != 'a' && choice != 'b') {
      throw isneak::Error(isneak::ErrorCode::bad_request, "choice must be 'A' or 'B'");
    }
    session->search->answer(choice == 'A' || choice == 'a' ? isneak::Choice::a : isneak::Choice::b);
  });
}

int isneak_session_done(const isneak_session* session, int* out) {
  return guarded([&] {
    need(session, "session");
    need(out, "out");
    *out = session->search->done() ? 1 : 0;
  });
}

int isneak_session_result(const isneak_session* session, int with_timing, char** json_out) {
  return guarded([&] {
    need(session, "session");
    need(json_out, "json_out");
    const auto& r = session->search->result();
    *json_out = dup(isneak::result_json(r, session->search->pool(), &session->encoded->scheme, with_timing != 0).dump(2));
  });
}

void isneak_session_free(isneak_session* session) { delete session; }

int isneak_bench(const char* models_dir, const char* algorithms, size_t repeats, uint64_t seed0, size_t pool_size,
                 size_t workers, const char* out_dir, char** csv_out) {
  return guarded([&] {
    need(models_dir, "models_dir");
    need(algorithms, "algorithms");
    isneak::BenchConfig config;
    config.algorithms.clear();
    std::stringstream list(algorithms);
    for (std::string a; std::getline(list, a, ',');) {
      if (!a.empty()) config.algorithms.push_back(a);
    }
    config.repeats = repeats;
    config.seed0 = seed0;
    config.workers = workers;
    if (out_dir) config.json_dir = std::filesystem::path(out_dir) / "runs";

    std::vector<isneak::LoadedModel> models;
    for (const auto& src : isneak::discover_models(models_dir)) {
      models.push_back(isneak::prepare_model(src.id, isneak::load_source(src, pool_size, 0)));
    }
    if (models.empty()) throw isneak::Error(isneak::ErrorCode::not_found, std::string("no models in ") + models_dir);
    const auto report = isneak::bench(models, config);
    if (out_dir) {
      isneak::write_file(std::filesystem::path(out_dir) / "report.csv", report.csv());
      isneak::write_file(std::filesystem::path(out_dir) / "summary.csv", report.summary_csv());
    }
    if (csv_out) *csv_out = dup(report.csv());
  });
}

int isneak_sweep(const isneak_pool* pool, const size_t* s_values, size_t count, size_t repeats, uint64_t seed0,
                 char** csv_out) {
  return guarded([&] {
    need(pool, "pool");
    need(s_values, "s_values");
    need(csv_out, "csv_out");
    const auto points = isneak::sweep_S(pool->loaded, std::span<const size_t>(s_values, count), repeats, seed0);
    std::string out = "S,median_I,runs\n";
    for (const auto& p : points) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "%zu,%g,%zu\n", p.s, p.median_interactions, p.runs);
      out += buf;
    }
    *csv_out = dup(out);
  });
}

int isneak_service_create(const char* models_dir, unsigned ttl_seconds, const char* snapshot_dir,
                          isneak_service** out) {
  return guarded([&] {
    need(out, "out");
    isneak::ServiceConfig config;
    if (models_dir) config.models_dir = models_dir;
    if (ttl_seconds) config.ttl = std::chrono::seconds(ttl_seconds);
    if (snapshot_dir) config.snapshot_dir = snapshot_dir;
    auto s = std::make_unique<isneak_service>();
    s->service = std::make_unique<isneak::SessionService>(config);
    s->service->restore_snapshots();
    *out = s.release();
  });
}

int isneak_service_add_pool(isneak_service* service, const char* model_id, const isneak_pool* pool) {
  return guarded([&] {
    need(service, "service");
    need(model_id, "model_id");
    need(pool, "pool");
    isneak::LoadedModel m = pool->loaded;
    m.id = model_id;
    service->service->add_model(std::move(m));
  });
}

int isneak_service_handle(isneak_service* service, const char* method, const char* path, const char* body,
                          int* status_out, char** body_out) {
  return guarded([&] {
    need(service, "service");
    need(method, "method");
    need(path, "path");
    need(status_out, "status_out");
    need(body_out, "body_out");
    const auto r = service->service->handle(method, path, body ? body : "");
    *status_out = r.status;
    *body_out = dup(r.body);
  });
}

void isneak_service_free(isneak_service* service) { delete service; }

}  // extern "C"
