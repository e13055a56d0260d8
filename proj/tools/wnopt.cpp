#include <CLI11.hpp>

#include <csignal>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "wnopt/engine.hpp"
#include "wnopt/error.hpp"
#include "wnopt/gen.hpp"
#include "wnopt/oracle.hpp"
#include "wnopt/preprocess.hpp"
#include "wnopt/scenario.hpp"
#include "wnopt/service.hpp"

using namespace wnopt;

namespace {

enum Exit { kOk = 0, kInfeasible = 1, kUsage = 2, kSolver = 3 };

struct ModelFlags {
  std::optional<std::string> objective;
  std::optional<std::string> sense;
  std::vector<std::string> scope;
  std::optional<int> discretization;
  std::optional<double> gap;
  std::optional<double> time;
  std::optional<std::string> backend;
  std::optional<double> mu;
  std::optional<std::string> conflict_mode;
  std::optional<std::string> config;
};

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
  cmd->add_option("--objective", f.objective, "TotalFlow, Cost or Energy");
  cmd->add_option("--sense", f.sense, "min or max");
  cmd->add_option("--scope", f.scope, "edge ids (from->to) and component ids")->delimiter(',');
  cmd->add_option("--K", f.discretization, "discretization number")->check(CLI::PositiveNumber);
  cmd->add_option("--gap", f.gap, "relative gap at which to stop")->check(CLI::NonNegativeNumber);
  cmd->add_option("--time", f.time, "time limit in seconds")->check(CLI::PositiveNumber);
  cmd->add_option("--backend", f.backend, "exact or external")->check(CLI::IsMember({"exact", "external"}));
  cmd->add_option("--mu", f.mu, "minimum flow on a used edge")->check(CLI::PositiveNumber);
  cmd->add_option("--conflict-mode", f.conflict_mode, "exclusive or all_options")
      ->check(CLI::IsMember({"exclusive", "all_options"}));
  cmd->add_option("--config", f.config, "engine options document; flags override it")->check(CLI::ExistingFile);
}

std::optional<ObjectiveKind> objective_kind(const std::string& text) {
  static const std::map<std::string, ObjectiveKind> names{
      {"TotalFlow", ObjectiveKind::TotalFlow}, {"total_flow", ObjectiveKind::TotalFlow},
      {"flow", ObjectiveKind::TotalFlow},      {"Cost", ObjectiveKind::Cost},
      {"cost", ObjectiveKind::Cost},           {"Energy", ObjectiveKind::Energy},
      {"energy", ObjectiveKind::Energy}};
  auto it = names.find(text);
  return it == names.end() ? std::nullopt : std::optional(it->second);
}

std::optional<Sense> sense_of(const std::string& text) {
  if (text == "min" || text == "minimize" || text == "Minimize") return Sense::Minimize;
  if (text == "max" || text == "maximize" || text == "Maximize") return Sense::Maximize;
  return std::nullopt;
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Objective from flags, falling back field by field on the network's own.
std::optional<Objective> objective_from_flags(const ModelFlags& f, const Network& net) {
  if (!f.objective && !f.sense && f.scope.empty()) return std::nullopt;
  Objective obj = net.objective.value_or(Objective{});
  if (f.objective) {
    auto k = objective_kind(*f.objective);
    if (!k) throw UsageError("unknown objective '" + *f.objective + "'");
    obj.kind = *k;
  }
  if (f.sense) {
    auto s = sense_of(*f.sense);
    if (!s) throw UsageError("unknown sense '" + *f.sense + "'");
    obj.sense = *s;
  }
  if (!f.scope.empty()) obj.scope = f.scope;
  if (obj.scope.empty()) throw UsageError("objective needs --scope");
  return obj;
}

// The engine section of a run request, in the service's format.
Json engine_config(const ModelFlags& f, const Network& net) {
  Json config = f.config ? parse_json(read_file(*f.config)) : Json::object();
  if (!config.is_object()) throw UsageError("--config must hold an object");
  if (f.discretization) config["discretization"] = *f.discretization;
  if (f.gap || f.time) {
    if (!config.contains("limits")) config["limits"] = Json::object();
    if (f.gap) config["limits"]["max_gap"] = *f.gap;
    if (f.time) config["limits"]["max_time"] = *f.time;
  }
  if (f.backend) config["backend"] = *f.backend;
  if (f.mu) config["mu"] = *f.mu;
  if (f.conflict_mode) config["conflict_mode"] = *f.conflict_mode;
  if (auto obj = objective_from_flags(f, net)) config["objective"] = objective_to_json(*obj);
  return config;
}

Network load(const std::string& path) { return parse_network(read_file(path)); }

void print(const Json& doc) { std::cout << dump_canonical(doc); }

int exit_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::MissingSolver:
    case ErrorCode::SolverCrash:
    case ErrorCode::NumericalBreakdown:
    case ErrorCode::BudgetExceeded:
      return kSolver;
    case ErrorCode::Io:
    case ErrorCode::ParseError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::EmptyObjective:
    case ErrorCode::OverlappingOptions:
      return kUsage;
    default:
      return kInfeasible;
  }
}

int cmd_validate(const std::string& path) {
  const auto report = validate(load(path));
  print(report_to_json(report));
  return report.ok() ? kOk : kInfeasible;
}

int cmd_optimize(const std::string& path, const ModelFlags& flags, const std::optional<std::string>& output) {
  const Network net = load(path);
  const auto report = validate(net);
  if (!report.ok()) {
    std::cerr << dump_canonical(report_to_json(report));
    return kInfeasible;
  }
  Json request{{"kind", "optimize"}, {"network", "input"}, {"config", engine_config(flags, net)}};
  request["snapshots"] = Json{{"input", network_to_json(net)}};
  const Json result = execute_run(RunKind::Optimize, request, "");
  const auto& sol = result.at("solution");
  const auto text = dump_canonical(sol);
  if (output) write_file_atomic(*output, text);
  std::cout << text;
  const auto status = parse_solve_status(sol.at("status").get<std::string>()).value_or(SolveStatus::Infeasible);
  std::cerr << "status " << to_string(status);
  if (has_flows(status)) std::cerr << " objective " << sol.at("objective_value").get<double>();
  std::cerr << "\n";
  if (has_flows(status)) return kOk;
  return status == SolveStatus::TimedOut ? kSolver : kInfeasible;
}

int cmd_check(const std::string& net_path, const std::string& sol_path, const ModelFlags& flags) {
  const Network net = load(net_path);
  const Solution sol = solution_from_json(parse_json(read_file(sol_path)));
  CheckTolerances tol;
  if (flags.mu) tol.mu = *flags.mu;
  auto objective = objective_from_flags(flags, net);
  if (!objective) objective = net.objective;
  const auto report = check_feasibility(net, sol.flows, tol, objective);
  print(report_to_json(report));
  return report.feasible ? kOk : kInfeasible;
}

int cmd_trials(const std::string& net_path, const std::string& config_path, std::size_t jobs, bool compare,
               const std::string& updated_path) {
  const Network net = load(net_path);
  const auto config = trial_config_from_json(parse_json(read_file(config_path)));
  if (compare) {
    print(comparison_to_json(compare_networks(net, load(updated_path), config, jobs)));
    return kOk;
  }
  const auto result = run_trials(net, config, jobs);
  print(trial_result_to_json(result));
  std::cerr << "trials " << result.n_trials << " in " << result.total_seconds << " s\n";
  return kOk;
}

int cmd_export_lp(const std::string& path, const ModelFlags& flags) {
  const Network net = load(path);
  const auto report = validate(net);
  if (!report.ok()) {
    std::cerr << dump_canonical(report_to_json(report));
    return kInfeasible;
  }
  const Json config = engine_config(flags, net);
  Json engine = config;
  std::optional<Objective> objective;
  if (auto it = engine.find("objective"); it != engine.end()) {
    objective = objective_from_json(*it);
    engine.erase("objective");
  }
  const auto opts = engine_options_from_json(engine);
  const auto canon = canonicalize(net);
  BuildOptions build;
  build.discretization = opts.discretization;
  build.mu = opts.mu;
  build.families = opts.families;
  build.conflict_mode = opts.conflict_mode;
  build.options = opts.options ? *opts.options : options_from_edges(net);
  std::cout << write_lp(build_model(canon, resolve_objective(net, objective), build));
  return kOk;
}

Service* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

int cmd_serve(const std::string& store, const std::string& bind, std::size_t workers, std::size_t queue_limit) {
  ServiceConfig config;
  config.store = store;
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw UsageError("--bind expects host:port");
  config.host = bind.substr(0, colon);
  config.port = std::stoi(bind.substr(colon + 1));
  config.workers = workers;
  config.queue_limit = queue_limit;
  Service service(config);
  const int port = service.bind();
  if (port < 0) {
    std::cerr << "cannot bind " << bind << "\n";
    return kUsage;
  }
  g_service = &service;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "listening on " << config.host << ":" << port << "\n";
  service.listen();
  g_service = nullptr;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Water network flow and quality optimizer"};
  app.require_subcommand(1);

  std::string net_path, second_path, third_path;
  std::optional<std::string> output;
  ModelFlags flags;
  std::size_t jobs = 1;

  auto* validate_cmd = app.add_subcommand("validate", "report structural and attribute problems");
  validate_cmd->add_option("net", net_path)->required()->check(CLI::ExistingFile);

  auto* optimize_cmd = app.add_subcommand("optimize", "solve the linearized model");
  optimize_cmd->add_option("net", net_path)->required()->check(CLI::ExistingFile);
  optimize_cmd->add_option("-o,--output", output, "also write the solution here");
  add_model_flags(optimize_cmd, flags);

  auto* check_cmd = app.add_subcommand("check", "evaluate a solution against the nonlinear model");
  check_cmd->add_option("net", net_path)->required()->check(CLI::ExistingFile);
  check_cmd->add_option("solution", second_path)->required()->check(CLI::ExistingFile);
  add_model_flags(check_cmd, flags);

  auto* trials_cmd = app.add_subcommand("trials", "Monte-Carlo design trials");
  trials_cmd->add_option("net", net_path)->required()->check(CLI::ExistingFile);
  trials_cmd->add_option("config", second_path)->required()->check(CLI::ExistingFile);
  trials_cmd->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  auto* compare_cmd = app.add_subcommand("compare", "KPIs of two network variants over the same trials");
  compare_cmd->add_option("net-a", net_path)->required()->check(CLI::ExistingFile);
  compare_cmd->add_option("net-b", third_path)->required()->check(CLI::ExistingFile);
  compare_cmd->add_option("config", second_path)->required()->check(CLI::ExistingFile);
  compare_cmd->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  auto* export_cmd = app.add_subcommand("export-lp", "write the linearized model as LP text");
  export_cmd->add_option("net", net_path)->required()->check(CLI::ExistingFile);
  add_model_flags(export_cmd, flags);

  std::string shape = "refinery", variant = "current";
  std::uint64_t seed = 1;
  std::optional<std::string> trials_out;
  auto* gen_cmd = app.add_subcommand("gen", "emit a synthetic case-study network");
  gen_cmd->add_option("--shape", shape)->check(CLI::IsMember({"refinery", "chem-a", "chem-b"}));
  gen_cmd->add_option("--variant", variant)->check(CLI::IsMember({"current", "updated"}));
  gen_cmd->add_option("--seed", seed);
  gen_cmd->add_option("--trials-config", trials_out, "also write a matching trial configuration here");

  std::string store = "store", bind = "127.0.0.1:8080";
  std::size_t workers = 0, queue_limit = 64;
  auto* serve_cmd = app.add_subcommand("serve", "run the HTTP service");
  serve_cmd->add_option("--store", store, "storage directory");
  serve_cmd->add_option("--bind", bind, "host:port");
  serve_cmd->add_option("--workers", workers, "run executor threads (0: one per CPU)");
  serve_cmd->add_option("--queue-limit", queue_limit, "queued runs before 429");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*validate_cmd) return cmd_validate(net_path);
    if (*optimize_cmd) return cmd_optimize(net_path, flags, output);
    if (*check_cmd) return cmd_check(net_path, second_path, flags);
    if (*trials_cmd) return cmd_trials(net_path, second_path, jobs, false, "");
    if (*compare_cmd) return cmd_trials(net_path, second_path, jobs, true, third_path);
    if (*export_cmd) return cmd_export_lp(net_path, flags);
    if (*gen_cmd) {
      const auto s = *parse_shape(shape);
      const auto v = *parse_variant(variant);
      std::cout << dump_network(generate(s, v, seed));
      if (trials_out) write_file_atomic(*trials_out, dump_canonical(trial_config_to_json(suggested_trials(s, v, seed))));
      return kOk;
    }
    if (*serve_cmd) return cmd_serve(store, bind, workers, queue_limit);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ValidationFailed& e) {
    std::cerr << dump_canonical(report_to_json(e.report()));
    return kInfeasible;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolver;
  }
  return kUsage;
}
