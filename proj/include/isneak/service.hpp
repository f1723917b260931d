#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "isneak/engine.hpp"
#include "isneak/evalkit.hpp"

namespace isneak {

struct Response {
  int status = 200;
  std::string body;  // JSON
};

struct ServiceConfig {
  std::filesystem::path models_dir;
  std::chrono::seconds ttl{1800};
  std::filesystem::path snapshot_dir;  // snapshots are written when set
  std::size_t default_pool_size = 10000;
  std::size_t max_pool_size = 100000;
};

/// Transport-independent session API. Each session is a suspended search;
/// requests for one session are serialized, different sessions run freely.
class SessionService {
 public:
  explicit SessionService(ServiceConfig config);
  ~SessionService();

  Response handle(const std::string& method, const std::string& path, const std::string& body);

  /// Serves `model` under its id regardless of requested pool size.
  void add_model(LoadedModel model);

  /// Drops sessions idle for longer than the TTL; returns how many.
  std::size_t expire_idle();
  std::size_t session_count() const;

  /// Rebuilds sessions from snapshot files by replaying recorded answers.
  std::size_t restore_snapshots();

 private:
  struct Session;

  Response list_models();
  Response create_session(const std::string& body);
  Response get_session(Session& s);
  Response post_answer(Session& s, const std::string& body);
  Response get_result(Session& s);
  Response post_rating(Session& s, const std::string& body);

  std::shared_ptr<Session> find(const std::string& id);
  LoadedModel model_for(const std::string& id, std::size_t pool_size);
  std::shared_ptr<Session> start(const std::string& model_id, std::size_t pool_size, std::uint64_t seed);
  void snapshot(const Session& s) const;

  ServiceConfig config_;
  mutable std::mutex mutex_;  // guards sessions_ and the model caches
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::map<std::string, LoadedModel> fixed_models_;
  std::map<std::pair<std::string, std::size_t>, LoadedModel> pool_cache_;
  std::mutex load_mutex_;     // serializes pool construction
  std::uint64_t counter_ = 0;
};

}  // namespace isneak
