#include "isneak/service.hpp"

#include <cstdio>
#include <random>

#include <json.hpp>

#include "isneak/error.hpp"
#include "isneak/serialize.hpp"

namespace isneak {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

struct SessionService::Session {
  std::string id;
  std::string model_id;
  std::size_t pool_size = 0;
  std::uint64_t seed = 0;
  LoadedModel model;
  std::unique_ptr<Search> search;
  std::vector<char> answers;
  std::vector<int> ratings;
  Clock::time_point last_active = Clock::now();
  std::mutex mutex;
};

namespace {

Response reply(int status, const json& body) { return {status, body.dump()}; }

Response fail(int status, ErrorCode code, const std::string& message, const char* field = nullptr) {
  json body{{"error", message}, {"code", to_string(code)}};
  if (field) body["field"] = field;
  return reply(status, body);
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::not_found: return 404;
    case ErrorCode::conflict: return 409;
    case ErrorCode::bad_request:
    case ErrorCode::parse:
    case ErrorCode::schema:
    case ErrorCode::out_of_range: return 400;
    case ErrorCode::unsupported: return 422;
    default: return 500;
  }
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : path.substr(0, path.find('?'))) {
    if (c == '/') {
      if (!cur.empty()) parts.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) parts.push_back(std::move(cur));
  return parts;
}

json parse_body(const std::string& body) {
  json doc = json::parse(body.empty() ? std::string("{}") : body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw Error(ErrorCode::bad_request, "body must be a JSON object");
  return doc;
}

std::string new_token(std::uint64_t counter) {
  static std::mt19937_64 gen{std::random_device{}()};
  char buf[48];
  std::snprintf(buf, sizeof buf, "%016llx%08llx", static_cast<unsigned long long>(gen()),
                static_cast<unsigned long long>(counter));
  return buf;
}

const char* state_of(const Search& s) {
  if (!s.done()) return "awaiting_answer";
  return s.result().status == RunStatus::aborted ? "aborted" : "done";
}

}  // namespace

SessionService::SessionService(ServiceConfig config) : config_(std::move(config)) {}
SessionService::~SessionService() = default;

void SessionService::add_model(LoadedModel model) {
  std::lock_guard lock(mutex_);
  fixed_models_[model.id] = std::move(model);
}

std::size_t SessionService::session_count() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

std::size_t SessionService::expire_idle() {
  const auto now = Clock::now();
  std::lock_guard lock(mutex_);
  std::size_t dropped = 0;
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    std::unique_lock session_lock(it->second->mutex, std::try_to_lock);
    if (session_lock.owns_lock() && now - it->second->last_active > config_.ttl) {
      session_lock.unlock();
      it = sessions_.erase(it);
      ++dropped;
    } else {
      ++it;
    }
  }
  return dropped;
}

Response SessionService::handle(const std::string& method, const std::string& path, const std::string& body) {
  try {
    expire_idle();
    const auto parts = split_path(path);
    if (parts.size() < 3 || parts[0] != "api" || parts[1] != "v1") {
      return fail(404, ErrorCode::not_found, "no such endpoint: " + path);
    }
    if (parts[2] == "models" && parts.size() == 3) {
      if (method != "GET") return fail(405, ErrorCode::bad_request, "method not allowed");
      return list_models();
    }
    if (parts[2] != "sessions") return fail(404, ErrorCode::not_found, "no such endpoint: " + path);
    if (parts.size() == 3) {
      if (method != "POST") return fail(405, ErrorCode::bad_request, "method not allowed");
      return create_session(body);
    }
    auto session = find(parts[3]);
    if (!session) return fail(404, ErrorCode::not_found, "unknown session: " + parts[3]);
    std::lock_guard lock(session->mutex);
    session->last_active = Clock::now();
    const std::string action = parts.size() > 4 ? parts[4] : "";
    if (parts.size() > 5) return fail(404, ErrorCode::not_found, "no such endpoint: " + path);
    if (action.empty() && method == "GET") return get_session(*session);
    if (action == "answer" && method == "POST") return post_answer(*session, body);
    if (action == "result" && method == "GET") return get_result(*session);
    if (action == "rating" && method == "POST") return post_rating(*session, body);
    return fail(404, ErrorCode::not_found, "no such endpoint: " + method + " " + path);
  } catch (const Error& e) {
    return fail(http_status(e.code()), e.code(), e.what());
  } catch (const std::exception& e) {
    return fail(500, ErrorCode::contract, e.what());
  }
}

Response SessionService::list_models() {
  json models = json::array();
  {
    std::lock_guard lock(mutex_);
    for (const auto& [id, m] : fixed_models_) {
      models.push_back({{"id", id}, {"kind", m.pool->model ? "cnf" : "table"}, {"candidates", m.pool->size()}});
    }
  }
  if (!config_.models_dir.empty()) {
    for (const auto& src : discover_models(config_.models_dir)) {
      models.push_back({{"id", src.id}, {"kind", src.kind == ModelSource::Kind::cnf ? "cnf" : "table"}});
    }
  }
  return reply(200, {{"models", models}});
}

LoadedModel SessionService::model_for(const std::string& id, std::size_t pool_size) {
  {
    std::lock_guard lock(mutex_);
    if (auto it = fixed_models_.find(id); it != fixed_models_.end()) return it->second;
  }
  std::lock_guard load(load_mutex_);
  {
    std::lock_guard lock(mutex_);
    if (auto it = pool_cache_.find({id, pool_size}); it != pool_cache_.end()) return it->second;
  }
  if (config_.models_dir.empty()) throw Error(ErrorCode::not_found, "unknown model: " + id);
  for (const auto& src : discover_models(config_.models_dir)) {
    if (src.id != id) continue;
    // Pools are enumerated with a fixed seed so every session on a model sees
    // the same candidates.
    LoadedModel m = prepare_model(id, load_source(src, pool_size, 0));
    std::lock_guard lock(mutex_);
    pool_cache_[{id, pool_size}] = m;
    return m;
  }
  throw Error(ErrorCode::not_found, "unknown model: " + id);
}

std::shared_ptr<SessionService::Session> SessionService::start(const std::string& model_id, std::size_t pool_size,
                                                                std::uint64_t seed) {
  auto s = std::make_shared<Session>();
  s->model_id = model_id;
  s->pool_size = pool_size;
  s->seed = seed;
  s->model = model_for(model_id, pool_size);
  RunConfig config;
  config.seed = seed;
  s->search = std::make_unique<Search>(s->model.pool, s->model.encoded, config);
  return s;
}

Response SessionService::create_session(const std::string& body) {
  const json doc = parse_body(body);
  if (!doc.contains("model_id") || !doc["model_id"].is_string()) {
    return fail(400, ErrorCode::bad_request, "model_id must be a string", "model_id");
  }
  std::uint64_t seed = 1;
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) return fail(400, ErrorCode::bad_request, "seed must be a non-negative integer", "seed");
    seed = doc["seed"].get<std::uint64_t>();
  }
  std::size_t pool_size = config_.default_pool_size;
  if (doc.contains("pool_size")) {
    if (!doc["pool_size"].is_number_unsigned() || doc["pool_size"].get<std::size_t>() < 16 ||
        doc["pool_size"].get<std::size_t>() > config_.max_pool_size) {
      return fail(400, ErrorCode::bad_request, "pool_size must be an integer in [16, " +
                                                   std::to_string(config_.max_pool_size) + "]", "pool_size");
    }
    pool_size = doc["pool_size"].get<std::size_t>();
  }
  auto session = start(doc["model_id"].get<std::string>(), pool_size, seed);
  {
    std::lock_guard lock(mutex_);
    session->id = new_token(++counter_);
    sessions_[session->id] = session;
  }
  snapshot(*session);
  return reply(201, {{"session_id", session->id}});
}

std::shared_ptr<SessionService::Session> SessionService::find(const std::string& id) {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

Response SessionService::get_session(Session& s) {
  json doc{{"session_id", s.id},
           {"state", state_of(*s.search)},
           {"progress", {{"asked", s.search->interactions()}, {"live_candidates", s.search->live_count()}}}};
  if (s.search->awaiting()) doc["question"] = question_json(s.search->pending(), s.model.encoded->scheme);
  return reply(200, doc);
}

Response SessionService::post_answer(Session& s, const std::string& body) {
  const json doc = parse_body(body);
  if (!doc.contains("choice") || !doc["choice"].is_string() ||
      (doc["choice"] != "A" && doc["choice"] != "B")) {
    return fail(400, ErrorCode::bad_request, "choice must be \"A\" or \"B\"", "choice");
  }
  if (!s.search->awaiting()) return fail(409, ErrorCode::conflict, "no question is awaiting an answer");
  if (doc.contains("question_id") &&
      (!doc["question_id"].is_number_integer() || doc["question_id"].get<int>() != s.search->pending().id)) {
    return fail(409, ErrorCode::conflict, "answer is for a different question", "question_id");
  }
  const char c = doc["choice"].get<std::string>()[0];
  s.search->answer(c == 'A' ? Choice::a : Choice::b);
  s.answers.push_back(c);
  snapshot(s);
  return get_session(s);
}

Response SessionService::get_result(Session& s) {
  if (!s.search->done()) return fail(404, ErrorCode::not_found, "run has not finished");
  RunResult r = s.search->result();
  r.ratings = s.ratings;
  json doc = result_json(r, *s.model.pool, &s.model.encoded->scheme);
  doc["session_id"] = s.id;
  return reply(200, doc);
}

Response SessionService::post_rating(Session& s, const std::string& body) {
  const json doc = parse_body(body);
  if (!doc.contains("score") || !doc["score"].is_number_integer() || doc["score"].get<int>() < 0 ||
      doc["score"].get<int>() > 5) {
    return fail(400, ErrorCode::bad_request, "score must be an integer in [0, 5]", "score");
  }
  if (!s.search->done()) return fail(409, ErrorCode::conflict, "ratings are accepted once the run is done");
  s.ratings.push_back(doc["score"].get<int>());
  snapshot(s);
  return reply(200, {{"ratings", s.ratings}});
}

void SessionService::snapshot(const Session& s) const {
  if (config_.snapshot_dir.empty()) return;
  json doc{{"session_id", s.id},
           {"model_id", s.model_id},
           {"pool_size", s.pool_size},
           {"seed", s.seed},
           {"answers", std::string(s.answers.begin(), s.answers.end())},
           {"ratings", s.ratings}};
  write_file(config_.snapshot_dir / (s.id + ".json"), doc.dump() + "\n");
}

std::size_t SessionService::restore_snapshots() {
  if (config_.snapshot_dir.empty() || !std::filesystem::is_directory(config_.snapshot_dir)) return 0;
  std::size_t restored = 0;
  for (const auto& entry : std::filesystem::directory_iterator(config_.snapshot_dir)) {
    if (entry.path().extension() != ".json") continue;
    const json doc = json::parse(read_file(entry.path()), nullptr, false);
    if (doc.is_discarded()) continue;
    try {
      auto s = start(doc.at("model_id").get<std::string>(), doc.at("pool_size").get<std::size_t>(),
                     doc.at("seed").get<std::uint64_t>());
      s->id = doc.at("session_id").get<std::string>();
      for (char c : doc.at("answers").get<std::string>()) {
        s->search->answer(c == 'A' ? Choice::a : Choice::b);
        s->answers.push_back(c);
      }
      s->ratings = doc.at("ratings").get<std::vector<int>>();
      std::lock_guard lock(mutex_);
      sessions_[s->id] = s;
      ++restored;
    } catch (const std::exception&) {
      continue;  // stale or foreign snapshot
    }
  }
  return restored;
}

}  // namespace isneak
