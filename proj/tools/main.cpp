// Command-line front end. Talks to the engine only through the C API.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "isneak.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Owns a string returned by the library.
struct Owned {
  char* p = nullptr;
  ~Owned() { isneak_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  ~Handle() {
    if (p) Free(p);
  }
};
using Model = Handle<isneak_model, isneak_model_free>;
using Pool = Handle<isneak_pool, isneak_pool_free>;
using Session = Handle<isneak_session, isneak_session_free>;
using Service = Handle<isneak_service, isneak_service_free>;

// Library failure; exit 1 for I/O problems, 3 otherwise.
struct Failure {
  int code;
  std::string message;
};

void check(int rc) {
  if (rc != ISNEAK_OK) throw Failure{rc, isneak_last_error_message()};
}

void require_file(const std::string& path) {
  if (!fs::exists(path)) throw Failure{ISNEAK_ERR_IO, "cannot open " + path};
}

std::string sibling(const fs::path& path, const std::string& suffix) {
  return (path.parent_path() / (path.stem().string() + suffix)).string();
}

std::string default_models_dir() {
  const char* env = std::getenv("ISNEAK_MODELS_DIR");
  return env ? env : "models";
}

void print_question(const json& q) {
  const auto& a = q.at("optionA");
  const auto& b = q.at("optionB");
  std::vector<std::string> left{"A"}, right{"B"};
  for (const auto& item : a) left.push_back(item.at("attr").get<std::string>() + " = " + item.at("value").get<std::string>());
  for (const auto& item : b) right.push_back(item.at("attr").get<std::string>() + " = " + item.at("value").get<std::string>());
  std::size_t width = 1;
  for (const auto& s : left) width = std::max(width, s.size());
  std::fprintf(stderr, "\nQuestion %d: which do you prefer?\n", q.at("id").get<int>());
  for (std::size_t i = 0; i < std::max(left.size(), right.size()); ++i) {
    const std::string l = i < left.size() ? left[i] : "";
    const std::string r = i < right.size() ? right[i] : "";
    std::fprintf(stderr, "  %-*s | %s\n", static_cast<int>(width), l.c_str(), r.c_str());
  }
}

char read_choice() {
  std::string line;
  while (true) {
    std::fprintf(stderr, "Answer [A/B]: ");
    if (!std::getline(std::cin, line)) throw Failure{ISNEAK_ERR_ORACLE, "input closed before all questions were answered"};
    for (char c : line) {
      if (c == 'A' || c == 'a') return 'A';
      if (c == 'B' || c == 'b') return 'B';
    }
  }
}

void load_pool(Pool& pool, const std::string& pool_path, const std::string& objectives, std::size_t pool_size,
               std::uint64_t seed) {
  require_file(pool_path);
  if (fs::path(pool_path).extension() == ".csv" && !objectives.empty()) {
    require_file(objectives);
    check(isneak_pool_load_csv(pool_path.c_str(), objectives.c_str(), &pool.p));
  } else {
    check(isneak_pool_open(pool_path.c_str(), pool_size, seed, &pool.p));
  }
}

int cmd_gen(std::size_t features, double ccr, std::uint64_t seed, const std::string& out) {
  Model model;
  check(isneak_model_generate(features, ccr, seed, &model.p));
  const fs::path path(out);
  const std::string objectives = sibling(path, ".objectives.json");
  const std::string table = sibling(path, ".features.csv");
  check(isneak_model_write(model.p, out.c_str(), objectives.c_str(), table.c_str()));
  std::size_t vars = 0, clauses = 0;
  check(isneak_model_num_vars(model.p, &vars));
  check(isneak_model_num_clauses(model.p, &clauses));
  std::printf("wrote %s (%zu vars, %zu clauses), %s, %s\n", out.c_str(), vars, clauses, objectives.c_str(),
              table.c_str());
  return 0;
}

int cmd_enumerate(const std::string& model_path, std::size_t count, std::uint64_t seed, const std::string& out) {
  Pool pool;
  require_file(model_path);
  check(isneak_pool_open(model_path.c_str(), count, seed, &pool.p));
  check(isneak_pool_write_csv(pool.p, out.c_str()));
  std::size_t n = 0;
  check(isneak_pool_size(pool.p, &n));
  std::printf("wrote %zu candidates to %s\n", n, out.c_str());
  return 0;
}

int cmd_run(const std::string& pool_path, const std::string& objectives, const std::string& oracle,
            const std::string& algorithm, std::uint64_t seed, std::size_t pool_size, std::size_t cap,
            const std::string& dump_tree, bool timing) {
  Pool pool;
  load_pool(pool, pool_path, objectives, pool_size, seed);
  if (!dump_tree.empty()) {
    Owned tree;
    check(isneak_tree_json(pool.p, seed, &tree.p));
    std::ofstream f(dump_tree);
    if (!f) throw Failure{ISNEAK_ERR_IO, "cannot write " + dump_tree};
    f << tree.str() << '\n';
  }
  Owned result;
  if (oracle == "interactive") {
    if (algorithm != "isneak") throw Failure{ISNEAK_ERR_CONTRACT, "interactive oracle requires --algorithm isneak"};
    Session session;
    check(isneak_session_start(pool.p, seed, cap, &session.p));
    int done = 0;
    check(isneak_session_done(session.p, &done));
    while (!done) {
      Owned q;
      check(isneak_session_question(session.p, &q.p));
      print_question(json::parse(q.str()));
      check(isneak_session_answer(session.p, read_choice()));
      check(isneak_session_done(session.p, &done));
    }
    check(isneak_session_result(session.p, timing ? 1 : 0, &result.p));
  } else {
    check(isneak_run(pool.p, algorithm.c_str(), seed, cap, timing ? 1 : 0, &result.p));
  }
  std::printf("%s\n", result.str().c_str());
  return 0;
}

int cmd_bench(const std::string& models, const std::string& algorithms, std::size_t repeats, std::uint64_t seed0,
              std::size_t pool_size, std::size_t workers, const std::string& out) {
  if (!fs::is_directory(models)) throw Failure{ISNEAK_ERR_IO, "not a directory: " + models};
  Owned csv;
  check(isneak_bench(models.c_str(), algorithms.c_str(), repeats, seed0, pool_size, workers,
                     out.empty() ? nullptr : out.c_str(), &csv.p));
  std::printf("%s", csv.str().c_str());
  return 0;
}

int cmd_sweep(const std::string& model_path, const std::vector<std::size_t>& s, std::size_t repeats,
              std::uint64_t seed0, std::size_t pool_size) {
  Pool pool;
  load_pool(pool, model_path, "", pool_size, 0);
  Owned csv;
  check(isneak_sweep(pool.p, s.data(), s.size(), repeats, seed0, &csv.p));
  std::printf("%s", csv.str().c_str());
  return 0;
}

int cmd_serve(int port, const std::string& host, const std::string& models, unsigned ttl,
              const std::string& snapshots, const std::string& ui_dir) {
  if (!fs::is_directory(models)) throw Failure{ISNEAK_ERR_IO, "not a directory: " + models};
  Service service;
  check(isneak_service_create(models.c_str(), ttl, snapshots.empty() ? nullptr : snapshots.c_str(), &service.p));

  httplib::Server server;
  auto forward = [&](const httplib::Request& req, httplib::Response& res) {
    int status = 500;
    Owned body;
    if (isneak_service_handle(service.p, req.method.c_str(), req.path.c_str(), req.body.c_str(), &status, &body.p) !=
        ISNEAK_OK) {
      status = 500;
      body.p = nullptr;
      res.set_content(json{{"error", isneak_last_error_message()}, {"code", "internal"}}.dump(), "application/json");
    } else {
      res.set_content(body.str(), "application/json");
    }
    res.status = status;
  };
  server.Get(R"(/api/v1/.*)", forward);
  server.Post(R"(/api/v1/.*)", forward);
  if (!ui_dir.empty() && !server.set_mount_point("/ui", ui_dir)) {
    throw Failure{ISNEAK_ERR_IO, "cannot serve " + ui_dir};
  }
  std::fprintf(stderr, "serving %s on http://%s:%d/api/v1/\n", models.c_str(), host.c_str(), port);
  if (!server.listen(host, port)) throw Failure{ISNEAK_ERR_IO, "cannot listen on port " + std::to_string(port)};
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"iSNEAK interactive many-objective optimizer"};
  app.require_subcommand(1);

  std::size_t features = 125;
  double ccr = 0.25;
  std::uint64_t seed = 1;
  std::string out;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic feature model");
  gen->add_option("--features", features, "Number of features")->required();
  gen->add_option("--ccr", ccr, "Cross-tree constraint ratio");
  gen->add_option("--seed", seed, "Random seed");
  gen->add_option("--out", out, "Output DIMACS path (sidecars are written next to it)")->required();

  std::string model_path;
  std::size_t count = 10000;
  auto* enumerate = app.add_subcommand("enumerate", "Enumerate valid configurations into a pool CSV");
  enumerate->add_option("--model", model_path, "DIMACS model path")->required();
  enumerate->add_option("--count", count, "Number of candidates");
  enumerate->add_option("--seed", seed, "Random seed");
  enumerate->add_option("--out", out, "Output CSV path")->required();

  std::string pool_path, objectives, oracle = "auto", algorithm = "isneak", dump_tree;
  std::size_t pool_size = 10000, cap = 0;
  bool timing = false;
  auto* run = app.add_subcommand("run", "Run one optimization");
  run->add_option("--pool", pool_path, "Pool CSV or DIMACS model path")->required();
  run->add_option("--objectives", objectives, "Objective sidecar for a pool CSV");
  run->add_option("--oracle", oracle, "Oracle")->check(CLI::IsMember({"auto", "interactive"}));
  run->add_option("--algorithm", algorithm, "Algorithm")->check(CLI::IsMember({"isneak", "flash", "nga"}));
  run->add_option("--seed", seed, "Random seed");
  run->add_option("--pool-size", pool_size, "Candidates to enumerate from a DIMACS model");
  run->add_option("--question-cap", cap, "Maximum attributes per question");
  run->add_option("--dump-tree", dump_tree, "Write the FASTMAP tree JSON here");
  run->add_flag("--timing", timing, "Include wall-clock timing in the result");

  std::string models = default_models_dir(), algorithms = "isneak,flash,nga";
  std::size_t repeats = 20, workers = 0;
  std::uint64_t seed0 = 1;
  auto* bench = app.add_subcommand("bench", "Benchmark algorithms over a model directory");
  bench->add_option("--models", models, "Model directory");
  bench->add_option("--algorithms", algorithms, "Comma-separated algorithms");
  bench->add_option("--repeats", repeats, "Seeds per (model, algorithm)");
  bench->add_option("--seed0", seed0, "First seed");
  bench->add_option("--pool-size", pool_size, "Candidates per DIMACS model");
  bench->add_option("--workers", workers, "Worker threads (0 = hardware)");
  bench->add_option("--out", out, "Output directory for report.csv, summary.csv and runs/");

  std::vector<std::size_t> s_values{1, 2, 4, 6, 8, 12};
  std::size_t sweep_repeats = 20;
  auto* sweep = app.add_subcommand("sweep", "Median interactions against question size");
  sweep->add_option("--model", model_path, "DIMACS model or pool CSV")->required();
  sweep->add_option("--s", s_values, "Question sizes")->delimiter(',');
  sweep->add_option("--repeats", sweep_repeats, "Seeds per size");
  sweep->add_option("--seed0", seed0, "First seed");
  sweep->add_option("--pool-size", pool_size, "Candidates to enumerate");

  int port = 8080;
  unsigned ttl = 1800;
  std::string host = "127.0.0.1", snapshots, ui_dir;
  auto* serve = app.add_subcommand("serve", "Serve interactive sessions over HTTP");
  serve->add_option("--port", port, "TCP port");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--models", models, "Model directory");
  serve->add_option("--ttl", ttl, "Idle session lifetime in seconds");
  serve->add_option("--snapshots", snapshots, "Directory for session snapshots");
  serve->add_option("--ui", ui_dir, "Static UI bundle served under /ui/");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: %s\n\n%s", e.what(), app.help().c_str());
    return 2;
  }

  try {
    if (*gen) return cmd_gen(features, ccr, seed, out);
    if (*enumerate) return cmd_enumerate(model_path, count, seed, out);
    if (*run) return cmd_run(pool_path, objectives, oracle, algorithm, seed, pool_size, cap, dump_tree, timing);
    if (*bench) return cmd_bench(models, algorithms, repeats, seed0, pool_size, workers, out);
    if (*sweep) return cmd_sweep(model_path, s_values, sweep_repeats, seed0, pool_size);
    if (*serve) return cmd_serve(port, host, models, ttl, snapshots, ui_dir);
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s\n", f.message.c_str());
    return f.code == ISNEAK_ERR_IO ? 1 : 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 2;
}
