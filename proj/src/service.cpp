#include "wnopt/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <ctime>
#include <deque>
#include <iostream>
#include <thread>

#include "wnopt/engine.hpp"
#include "wnopt/error.hpp"
#include "wnopt/scenario.hpp"

namespace wnopt {

namespace {

constexpr const char* kJson = "application/json";

std::string now_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json error_body(std::string_view code, const std::string& message) {
  return Json{{"error", std::string(code)}, {"message", message}};
}

void reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(dump_canonical(body), kJson);
}

void reply_text(httplib::Response& res, int status, const std::string& text) {
  res.status = status;
  res.set_content(text, kJson);
}

// Maps engine and repository failures onto HTTP statuses.
void reply_error(httplib::Response& res, const Error& e, const std::string& id = {}) {
  Json body = error_body(to_string(e.code()), e.what());
  switch (e.code()) {
    case ErrorCode::Corrupt:
      if (!id.empty()) body["id"] = id;
      reply(res, 500, body);
      return;
    case ErrorCode::Io:
      res.set_header("Retry-After", "5");
      reply(res, 503, body);
      return;
    case ErrorCode::ValidationFailed:
      if (auto* v = dynamic_cast<const ValidationFailed*>(&e)) body["report"] = report_to_json(v->report());
      reply(res, 422, body);
      return;
    default:
      reply(res, 422, body);
      return;
  }
}

std::string snapshot_key(const Json& request, const char* field) {
  auto it = request.find(field);
  if (it == request.end() || !it->is_string()) {
    throw Error(ErrorCode::ParseError, std::string("run request needs a network id in \"") + field + "\"");
  }
  return it->get<std::string>();
}

Network snapshot(const Json& request, const char* field) {
  const auto id = snapshot_key(request, field);
  const auto& snaps = request.at("snapshots");
  auto it = snaps.find(id);
  if (it == snaps.end()) throw Error(ErrorCode::Corrupt, "run request lacks a snapshot of network '" + id + "'");
  return network_from_json(*it);
}

}  // namespace

std::string_view to_string(RunKind kind) {
  switch (kind) {
    case RunKind::Optimize: return "optimize";
    case RunKind::Trials: return "trials";
    case RunKind::Compare: return "compare";
  }
  return "optimize";
}

std::optional<RunKind> parse_run_kind(std::string_view text) {
  if (text == "optimize") return RunKind::Optimize;
  if (text == "trials") return RunKind::Trials;
  if (text == "compare") return RunKind::Compare;
  return std::nullopt;
}

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Queued: return "queued";
    case RunStatus::Running: return "running";
    case RunStatus::Done: return "done";
    case RunStatus::Failed: return "failed";
  }
  return "queued";
}

std::optional<RunStatus> parse_run_status(std::string_view text) {
  if (text == "queued") return RunStatus::Queued;
  if (text == "running") return RunStatus::Running;
  if (text == "done") return RunStatus::Done;
  if (text == "failed") return RunStatus::Failed;
  return std::nullopt;
}

Json run_to_json(const RunRecord& run) {
  Json out = Json::object();
  out["id"] = run.id;
  out["kind"] = std::string(to_string(run.kind));
  out["status"] = std::string(to_string(run.status));
  out["submitted_at"] = run.submitted_at;
  out["started_at"] = run.started_at;
  out["finished_at"] = run.finished_at;
  out["error"] = run.error;
  out["request"] = run.request;
  out["result"] = run.result;
  return out;
}

RunRecord run_from_json(const Json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, "run record must be an object");
  RunRecord run;
  run.id = json_field::required_string(doc, "id");
  auto kind = parse_run_kind(json_field::required_string(doc, "kind"));
  auto status = parse_run_status(json_field::required_string(doc, "status"));
  if (!kind || !status) throw Error(ErrorCode::ParseError, "run record has an unknown kind or status");
  run.kind = *kind;
  run.status = *status;
  run.submitted_at = json_field::string(doc, "submitted_at").value_or("");
  run.started_at = json_field::string(doc, "started_at").value_or("");
  run.finished_at = json_field::string(doc, "finished_at").value_or("");
  run.error = json_field::string(doc, "error").value_or("");
  if (auto it = doc.find("request"); it != doc.end()) run.request = *it;
  if (auto it = doc.find("result"); it != doc.end()) run.result = *it;
  return run;
}

bool valid_id(std::string_view id) {
  if (id.empty() || id.size() > 128 || id.front() == '.') return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-' ||
           c == '.';
  });
}

Repository::Repository(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_ / "networks", ec);
  if (!ec) std::filesystem::create_directories(root_ / "runs", ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create store at " + root_.string() + ": " + ec.message());
}

std::filesystem::path Repository::network_path(const std::string& id) const {
  return root_ / "networks" / (id + ".json");
}

std::filesystem::path Repository::run_path(const std::string& id) const { return root_ / "runs" / (id + ".json"); }

std::shared_ptr<std::mutex> Repository::lock_for(const std::string& key) const {
  std::lock_guard guard(locks_mutex_);
  auto& slot = locks_[key];
  if (!slot) slot = std::make_shared<std::mutex>();
  return slot;
}

std::string Repository::put_network(const std::string& id, const Network& net) {
  const auto text = dump_network(net);
  auto lock = lock_for("n/" + id);
  std::lock_guard guard(*lock);
  write_file_atomic(network_path(id), text);
  return text;
}

std::optional<std::string> Repository::network_text(const std::string& id) const {
  const auto path = network_path(id);
  auto lock = lock_for("n/" + id);
  std::lock_guard guard(*lock);
  if (!std::filesystem::exists(path)) return std::nullopt;
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error&) {
    throw Error(ErrorCode::Corrupt, "network '" + id + "' cannot be read");
  }
  return text;
}

std::optional<Network> Repository::load_network(const std::string& id) const {
  auto text = network_text(id);
  if (!text) return std::nullopt;
  try {
    return parse_network(*text);
  } catch (const Error& e) {
    throw Error(ErrorCode::Corrupt, "network '" + id + "' is not a valid document: " + e.what());
  }
}

bool Repository::delete_network(const std::string& id) {
  auto lock = lock_for("n/" + id);
  std::lock_guard guard(*lock);
  std::error_code ec;
  const bool removed = std::filesystem::remove(network_path(id), ec);
  if (ec) throw Error(ErrorCode::Io, "cannot delete network '" + id + "': " + ec.message());
  return removed;
}

namespace {

std::vector<std::string> ids_in(const std::filesystem::path& dir) {
  std::vector<std::string> ids;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    const auto& p = entry.path();
    if (p.extension() == ".json" && valid_id(p.stem().string())) ids.push_back(p.stem().string());
  }
  if (ec) throw Error(ErrorCode::Io, "cannot list " + dir.string() + ": " + ec.message());
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace

std::vector<std::string> Repository::network_ids() const { return ids_in(root_ / "networks"); }

void Repository::save_run(const RunRecord& run) {
  const auto text = dump_canonical(run_to_json(run));
  auto lock = lock_for("r/" + run.id);
  std::lock_guard guard(*lock);
  write_file_atomic(run_path(run.id), text);
}

std::optional<RunRecord> Repository::load_run(const std::string& id) const {
  const auto path = run_path(id);
  auto lock = lock_for("r/" + id);
  std::lock_guard guard(*lock);
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    return run_from_json(parse_json(read_file(path)));
  } catch (const Error& e) {
    throw Error(ErrorCode::Corrupt, "run '" + id + "' is not a valid document: " + e.what());
  }
}

std::vector<std::string> Repository::run_ids() const { return ids_in(root_ / "runs"); }

Json execute_run(RunKind kind, const Json& request, const std::string& solver_command) {
  const Json config = request.contains("config") ? request.at("config") : Json::object();
  EngineOptions base;
  base.solver_command = solver_command;
  switch (kind) {
    case RunKind::Optimize: {
      const Network net = snapshot(request, "network");
      std::optional<Objective> objective;
      if (auto it = config.find("objective"); it != config.end()) objective = objective_from_json(*it);
      Json engine = config;
      engine.erase("objective");
      const auto opts = engine_options_from_json(engine, base);
      const auto result = optimize(net, resolve_objective(net, objective), opts);
      return Json{{"solution", solution_to_json(result.solution)},
                  {"profile",
                   {{"continuous", result.profile.continuous},
                    {"binary", result.profile.binary},
                    {"constraints", result.profile.constraints}}}};
    }
    case RunKind::Trials: {
      const Network net = snapshot(request, "network");
      const auto tc = trial_config_from_json(config, base);
      const std::size_t jobs = config.value("jobs", std::size_t{1});
      return trial_result_to_json(run_trials(net, tc, jobs));
    }
    case RunKind::Compare: {
      const Network current = snapshot(request, "network");
      const Network updated = snapshot(request, "updated");
      const auto tc = trial_config_from_json(config, base);
      const std::size_t jobs = config.value("jobs", std::size_t{1});
      return comparison_to_json(compare_networks(current, updated, tc, jobs));
    }
  }
  return nullptr;
}

struct Service::Impl {
  ServiceConfig config;
  Repository repo;
  httplib::Server server;
  std::mutex mutex;
  std::condition_variable work_cv;
  std::condition_variable idle_cv;
  std::deque<std::string> queue;
  std::size_t running = 0;
  std::map<std::string, std::size_t> running_refs;  // network id -> running runs referencing it
  std::map<std::string, Json> pending_requests;      // run id -> request, until a worker takes it
  std::uint64_t next_run = 1;
  bool stopping = false;
  std::vector<std::thread> workers;

  explicit Impl(ServiceConfig c) : config(std::move(c)), repo(config.store) {
    recover();
    const std::size_t n = config.workers ? config.workers : std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t i = 0; i < n; ++i) workers.emplace_back([this] { work(); });
    routes();
  }

  ~Impl() {
    {
      std::lock_guard guard(mutex);
      stopping = true;
    }
    work_cv.notify_all();
    for (auto& w : workers) w.join();
  }

  // Runs left queued or running by a previous process cannot resume.
  void recover() {
    for (const auto& id : repo.run_ids()) {
      if (id.rfind("run-", 0) == 0) {
        try {
          next_run = std::max<std::uint64_t>(next_run, std::stoull(id.substr(4)) + 1);
        } catch (const std::exception&) {
        }
      }
      try {
        auto run = repo.load_run(id);
        if (run && (run->status == RunStatus::Queued || run->status == RunStatus::Running)) {
          run->status = RunStatus::Failed;
          run->error = "interrupted by a service restart";
          run->finished_at = now_utc();
          repo.save_run(*run);
        }
      } catch (const Error& e) {
        std::cerr << "skipping run " << id << ": " << e.what() << "\n";
      }
    }
  }

  static std::vector<std::string> referenced_networks(const Json& request) {
    std::vector<std::string> ids;
    for (const char* field : {"network", "updated"}) {
      if (auto it = request.find(field); it != request.end() && it->is_string()) ids.push_back(it->get<std::string>());
    }
    return ids;
  }

  void work() {
    for (;;) {
      std::string id;
      Json request;
      {
        std::unique_lock lock(mutex);
        work_cv.wait(lock, [this] { return stopping || !queue.empty(); });
        if (stopping) return;
        id = queue.front();
        queue.pop_front();
        request = std::move(pending_requests[id]);
        pending_requests.erase(id);
        ++running;
        for (const auto& n : referenced_networks(request)) ++running_refs[n];
      }
      execute(id, request);
      {
        std::lock_guard guard(mutex);
        --running;
        for (const auto& n : referenced_networks(request)) {
          if (--running_refs[n] == 0) running_refs.erase(n);
        }
      }
      idle_cv.notify_all();
    }
  }

  void execute(const std::string& id, const Json& request) {
    RunRecord run;
    try {
      auto loaded = repo.load_run(id);
      if (!loaded) return;
      run = std::move(*loaded);
      run.status = RunStatus::Running;
      run.started_at = now_utc();
      repo.save_run(run);
      run.result = execute_run(run.kind, request, config.solver_command);
      run.status = RunStatus::Done;
    } catch (const std::exception& e) {
      run.status = RunStatus::Failed;
      run.error = e.what();
    }
    run.finished_at = now_utc();
    try {
      repo.save_run(run);
    } catch (const std::exception& e) {
      std::cerr << "cannot persist run " << id << ": " << e.what() << "\n";
    }
  }

  void routes() {
    server.Put(R"(/networks/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      if (!valid_id(id)) return reply(res, 400, error_body("InvalidArgument", "invalid network id"));
      Network net;
      try {
        net = parse_network(req.body);
      } catch (const Error& e) {
        return reply(res, 400, error_body(to_string(e.code()), e.what()));
      }
      const auto report = validate(net);
      if (!report.ok()) {
        Json body = error_body("ValidationFailed", "network failed validation");
        body["report"] = report_to_json(report);
        return reply(res, 422, body);
      }
      try {
        reply_text(res, 200, repo.put_network(id, net));
      } catch (const Error& e) {
        reply_error(res, e, id);
      }
    });

    server.Get(R"(/networks/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      if (!valid_id(id)) return reply(res, 400, error_body("InvalidArgument", "invalid network id"));
      try {
        // Parsed before returning so a damaged document is reported, not served.
        auto net = repo.load_network(id);
        if (!net) return reply(res, 404, error_body("NotFound", "no network '" + id + "'"));
        reply_text(res, 200, dump_network(*net));
      } catch (const Error& e) {
        reply_error(res, e, id);
      }
    });

    server.Delete(R"(/networks/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      if (!valid_id(id)) return reply(res, 400, error_body("InvalidArgument", "invalid network id"));
      {
        std::lock_guard guard(mutex);
        if (running_refs.count(id)) {
          return reply(res, 409, error_body("Conflict", "network '" + id + "' is referenced by a running run"));
        }
      }
      try {
        if (!repo.delete_network(id)) return reply(res, 404, error_body("NotFound", "no network '" + id + "'"));
        res.status = 204;
      } catch (const Error& e) {
        reply_error(res, e, id);
      }
    });

    server.Get("/networks", [this](const httplib::Request&, httplib::Response& res) {
      try {
        reply(res, 200, Json{{"networks", repo.network_ids()}});
      } catch (const Error& e) {
        reply_error(res, e);
      }
    });

    server.Post("/runs", [this](const httplib::Request& req, httplib::Response& res) { submit(req, res); });

    server.Get("/runs", [this](const httplib::Request&, httplib::Response& res) {
      try {
        Json runs = Json::array();
        for (const auto& id : repo.run_ids()) {
          try {
            auto run = repo.load_run(id);
            if (run) runs.push_back(Json{{"id", run->id}, {"kind", to_string(run->kind)}, {"status", to_string(run->status)}});
          } catch (const Error&) {
            runs.push_back(Json{{"id", id}, {"status", "corrupt"}});
          }
        }
        reply(res, 200, Json{{"runs", runs}});
      } catch (const Error& e) {
        reply_error(res, e);
      }
    });

    server.Get(R"(/runs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      if (!valid_id(id)) return reply(res, 400, error_body("InvalidArgument", "invalid run id"));
      try {
        auto run = repo.load_run(id);
        if (!run) return reply(res, 404, error_body("NotFound", "no run '" + id + "'"));
        reply(res, 200, run_to_json(*run));
      } catch (const Error& e) {
        reply_error(res, e, id);
      }
    });

    server.Get(R"(/runs/([^/]+)/solution)", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      if (!valid_id(id)) return reply(res, 400, error_body("InvalidArgument", "invalid run id"));
      try {
        auto run = repo.load_run(id);
        if (!run) return reply(res, 404, error_body("NotFound", "no run '" + id + "'"));
        if (run->kind != RunKind::Optimize) {
          return reply(res, 404, error_body("NotFound", "run '" + id + "' is not an optimize run"));
        }
        if (run->status != RunStatus::Done) {
          return reply(res, 409, error_body("NotReady", "run '" + id + "' is " + std::string(to_string(run->status))));
        }
        reply(res, 200, run->result.at("solution"));
      } catch (const Error& e) {
        reply_error(res, e, id);
      } catch (const Json::exception& e) {
        reply(res, 500, Json{{"error", "Corrupt"}, {"message", e.what()}, {"id", id}});
      }
    });

    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        reply(res, 500, error_body("Internal", e.what()));
      } catch (...) {
        reply(res, 500, error_body("Internal", "unknown failure"));
      }
    });
  }

  void submit(const httplib::Request& req, httplib::Response& res) {
    Json request;
    try {
      request = parse_json(req.body);
    } catch (const Error& e) {
      return reply(res, 400, error_body(to_string(e.code()), e.what()));
    }
    if (!request.is_object()) return reply(res, 400, error_body("ParseError", "run request must be an object"));
    const auto kind_text = request.value("kind", std::string());
    const auto kind = parse_run_kind(kind_text);
    if (!kind) return reply(res, 422, error_body("InvalidArgument", "unknown run kind '" + kind_text + "'"));
    if (auto it = request.find("config"); it != request.end() && !it->is_object()) {
      return reply(res, 422, error_body("ParseError", "config must be an object"));
    }

    std::vector<const char*> fields{"network"};
    if (*kind == RunKind::Compare) fields.push_back("updated");
    Json snapshots = Json::object();
    for (const char* field : fields) {
      auto it = request.find(field);
      if (it == request.end() || !it->is_string() || !valid_id(it->get<std::string>())) {
        return reply(res, 422, error_body("InvalidArgument", std::string("run needs a network id in \"") + field + "\""));
      }
      const auto id = it->get<std::string>();
      try {
        auto net = repo.load_network(id);
        if (!net) return reply(res, 404, error_body("NotFound", "no network '" + id + "'"));
        snapshots[id] = network_to_json(*net);
      } catch (const Error& e) {
        return reply_error(res, e, id);
      }
    }
    request["snapshots"] = std::move(snapshots);

    // Reject malformed configurations up front rather than as failed runs.
    try {
      const Json config = request.contains("config") ? request.at("config") : Json::object();
      if (*kind == RunKind::Optimize) {
        Json engine = config;
        if (auto it = engine.find("objective"); it != engine.end()) {
          objective_from_json(*it);
          engine.erase("objective");
        }
        validate_limits(engine_options_from_json(engine).limits);
      } else {
        validate_limits(trial_config_from_json(config).engine.limits);
      }
    } catch (const Error& e) {
      return reply_error(res, e);
    }

    RunRecord run;
    run.kind = *kind;
    run.request = request;
    run.submitted_at = now_utc();
    {
      std::lock_guard guard(mutex);
      if (queue.size() >= config.queue_limit) {
        res.set_header("Retry-After", "5");
        return reply(res, 429, error_body("QueueFull", "too many queued runs"));
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "run-%06llu", static_cast<unsigned long long>(next_run++));
      run.id = buf;
      try {
        repo.save_run(run);
      } catch (const Error& e) {
        return reply_error(res, e, run.id);
      }
      pending_requests[run.id] = request;
      queue.push_back(run.id);
    }
    work_cv.notify_one();
    reply(res, 202, Json{{"id", run.id}, {"status", to_string(RunStatus::Queued)}});
  }
};

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Service::~Service() {
  stop();
}

int Service::bind() {
  if (impl_->config.port == 0) return impl_->server.bind_to_any_port(impl_->config.host);
  return impl_->server.bind_to_port(impl_->config.host, impl_->config.port) ? impl_->config.port : -1;
}

bool Service::listen() { return impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

void Service::drain() {
  std::unique_lock lock(impl_->mutex);
  impl_->idle_cv.wait(lock, [this] { return impl_->queue.empty() && impl_->running == 0; });
}

}  // namespace wnopt
