#include "wnopt/engine.hpp"

#include <cstdlib>

#include "wnopt/error.hpp"
#include "wnopt/network_io.hpp"
#include "wnopt/preprocess.hpp"
#include "wnopt/scenario.hpp"

namespace wnopt {

namespace {

std::string summarize(const ValidationReport& report) {
  std::string out = "network failed validation";
  for (const auto& v : report.violations) out += "; " + v.code + " at '" + v.element + "'";
  return out;
}

}  // namespace

std::string_view to_string(Backend backend) { return backend == Backend::Exact ? "exact" : "external"; }

std::optional<Backend> parse_backend(std::string_view text) {
  if (text == "exact") return Backend::Exact;
  if (text == "external") return Backend::External;
  return std::nullopt;
}

std::string_view to_string(ConflictMode mode) {
  return mode == ConflictMode::ExclusiveOptions ? "exclusive" : "all_options";
}

std::optional<ConflictMode> parse_conflict_mode(std::string_view text) {
  if (text == "exclusive") return ConflictMode::ExclusiveOptions;
  if (text == "all_options") return ConflictMode::AllOptionsAvailable;
  return std::nullopt;
}

ValidationFailed::ValidationFailed(ValidationReport report)
    : Error(ErrorCode::ValidationFailed, summarize(report)), report_(std::move(report)) {}

std::string solver_command_or_env(const std::string& configured) {
  if (!configured.empty()) return configured;
  const char* env = std::getenv("SOLVER_CMD");
  return env ? std::string(env) : std::string();
}

Objective resolve_objective(const Network& net, const std::optional<Objective>& explicit_objective) {
  if (explicit_objective) return *explicit_objective;
  if (net.objective) return *net.objective;
  throw Error(ErrorCode::InvalidArgument, "no objective given and the network declares none");
}

OptimizeResult optimize(const Network& net, const Objective& objective, const EngineOptions& opts) {
  auto report = validate(net);
  if (!report.ok()) throw ValidationFailed(std::move(report));
  validate_limits(opts.limits);

  const auto canon = canonicalize(net);
  BuildOptions build;
  build.discretization = opts.discretization;
  build.mu = opts.mu;
  build.families = opts.families;
  build.conflict_mode = opts.conflict_mode;
  build.options = opts.options ? *opts.options : options_from_edges(net);
  const auto model = build_model(canon, objective, build);

  Solution solved = opts.backend == Backend::Exact
                        ? solve_exact(model, opts.limits)
                        : solve_external(model, opts.limits, solver_command_or_env(opts.solver_command));

  OptimizeResult result;
  result.profile = count_profile(model);
  result.solution = uncanonicalize(canon, net, solved);
  result.solution.options.clear();
  if (has_flows(result.solution.status)) {
    const auto used = extract_options(result.solution, build.options, model.policy.mu);
    for (const auto& g : build.options) result.solution.options[g.name] = used.count(g.name) ? 1 : 0;
  }
  return result;
}

Json engine_options_to_json(const EngineOptions& opts) {
  Json out = Json::object();
  out["backend"] = std::string(to_string(opts.backend));
  out["discretization"] = opts.discretization;
  if (opts.mu) out["mu"] = *opts.mu;
  out["limits"] = Json{{"max_gap", opts.limits.max_gap}, {"max_time", opts.limits.max_time}};
  out["conflict_mode"] = std::string(to_string(opts.conflict_mode));
  out["exit_limits"] = opts.families.exit_limits;
  out["entry_limits_rr"] = opts.families.entry_limits_rr;
  if (opts.options) {
    Json groups = Json::array();
    for (const auto& g : *opts.options) {
      groups.push_back(Json{{"name", g.name}, {"decision", g.decision}, {"edges", g.edges}});
    }
    out["options"] = std::move(groups);
  }
  return out;
}

namespace {

bool boolean(const Json& doc, std::string_view key, bool fallback) {
  auto it = doc.find(key);
  if (it == doc.end()) return fallback;
  if (!it->is_boolean()) throw Error(ErrorCode::ParseError, std::string(key) + " must be a boolean");
  return it->get<bool>();
}

}  // namespace

std::vector<OptionGroup> option_groups_from_json(const Json& list) {
  if (!list.is_array()) throw Error(ErrorCode::ParseError, "option groups must be an array");
  std::vector<OptionGroup> groups;
  for (const auto& item : list) {
    if (!item.is_object()) throw Error(ErrorCode::ParseError, "option group must be an object");
    OptionGroup g;
    g.name = json_field::required_string(item, "name");
    g.decision = json_field::string(item, "decision").value_or("default");
    if (auto it = item.find("edges"); it != item.end()) {
      if (!it->is_array()) throw Error(ErrorCode::ParseError, "option edges must be an array");
      for (const auto& e : *it) {
        if (!e.is_string()) throw Error(ErrorCode::ParseError, "option edge ids must be strings");
        g.edges.push_back(e.get<std::string>());
      }
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

EngineOptions engine_options_from_json(const Json& doc, EngineOptions base) {
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, "engine options must be an object");
  if (auto b = json_field::string(doc, "backend")) {
    auto parsed = parse_backend(*b);
    if (!parsed) throw Error(ErrorCode::ParseError, "unknown backend '" + *b + "'");
    base.backend = *parsed;
  }
  if (auto k = json_field::number(doc, "discretization")) base.discretization = static_cast<int>(*k);
  if (auto mu = json_field::number(doc, "mu")) base.mu = *mu;
  if (auto it = doc.find("limits"); it != doc.end()) {
    if (!it->is_object()) throw Error(ErrorCode::ParseError, "limits must be an object");
    if (auto g = json_field::number(*it, "max_gap")) base.limits.max_gap = *g;
    if (auto t = json_field::number(*it, "max_time")) base.limits.max_time = *t;
  }
  if (auto m = json_field::string(doc, "conflict_mode")) {
    auto parsed = parse_conflict_mode(*m);
    if (!parsed) throw Error(ErrorCode::ParseError, "unknown conflict_mode '" + *m + "'");
    base.conflict_mode = *parsed;
  }
  base.families.exit_limits = boolean(doc, "exit_limits", base.families.exit_limits);
  base.families.entry_limits_rr = boolean(doc, "entry_limits_rr", base.families.entry_limits_rr);
  if (auto it = doc.find("options"); it != doc.end()) base.options = option_groups_from_json(*it);
  return base;
}

}  // namespace wnopt
