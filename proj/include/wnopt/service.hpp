#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "wnopt/network_io.hpp"

namespace wnopt {

enum class RunKind { Optimize, Trials, Compare };
enum class RunStatus { Queued, Running, Done, Failed };

std::string_view to_string(RunKind kind);
std::optional<RunKind> parse_run_kind(std::string_view text);
std::string_view to_string(RunStatus status);
std::optional<RunStatus> parse_run_status(std::string_view text);

struct RunRecord {
  std::string id;
  RunKind kind = RunKind::Optimize;
  RunStatus status = RunStatus::Queued;
  Json request = Json::object();   // as submitted, with network snapshots under "snapshots"
  Json result = nullptr;
  std::string error;
  std::string submitted_at;
  std::string started_at;
  std::string finished_at;
};

Json run_to_json(const RunRecord& run);
RunRecord run_from_json(const Json& doc);

// Ids usable as file names: 1-128 characters from [A-Za-z0-9_.-], not
// starting with a dot.
bool valid_id(std::string_view id);

// Canonical documents under <root>/networks and <root>/runs. Writes go
// through a temporary file and a rename, serialized per document id.
// Unreadable or unparsable documents raise Error(Corrupt) naming the id;
// filesystem failures raise Error(Io).
class Repository {
 public:
  explicit Repository(std::filesystem::path root);

  // Returns the canonical text that was stored.
  std::string put_network(const std::string& id, const Network& net);
  std::optional<std::string> network_text(const std::string& id) const;
  std::optional<Network> load_network(const std::string& id) const;
  bool delete_network(const std::string& id);
  std::vector<std::string> network_ids() const;

  void save_run(const RunRecord& run);
  std::optional<RunRecord> load_run(const std::string& id) const;
  std::vector<std::string> run_ids() const;

 private:
  std::filesystem::path network_path(const std::string& id) const;
  std::filesystem::path run_path(const std::string& id) const;
  std::shared_ptr<std::mutex> lock_for(const std::string& key) const;

  std::filesystem::path root_;
  mutable std::mutex locks_mutex_;
  mutable std::map<std::string, std::shared_ptr<std::mutex>> locks_;
};

struct ServiceConfig {
  std::filesystem::path store = "store";
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t workers = 0;        // 0: hardware concurrency
  std::size_t queue_limit = 64;   // queued runs beyond this get 429
  std::string solver_command;     // external backend; empty falls back to $SOLVER_CMD
};

// Executes one run request. `request` holds "kind", "config" and the network
// snapshots; the returned document is the run's result payload. Shared by the
// HTTP service and the CLI so both produce identical results.
Json execute_run(RunKind kind, const Json& request, const std::string& solver_command);

// HTTP API over a Repository with an asynchronous run executor:
//   PUT/GET/DELETE /networks/{id}, GET /networks,
//   POST /runs, GET /runs, GET /runs/{id}, GET /runs/{id}/solution.
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds config.host on config.port, or on any free port when the port is 0.
  // Returns the bound port, or -1.
  int bind();
  // Serves until stop(); blocks.
  bool listen();
  void stop();
  // Blocks until no run is queued or running.
  void drain();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace wnopt
