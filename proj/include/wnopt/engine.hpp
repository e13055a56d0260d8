#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wnopt/error.hpp"
#include "wnopt/milp.hpp"
#include "wnopt/network.hpp"
#include "wnopt/solution.hpp"
#include "wnopt/solver.hpp"

namespace wnopt {

enum class Backend { Exact, External };

std::string_view to_string(Backend backend);
std::optional<Backend> parse_backend(std::string_view text);
std::string_view to_string(ConflictMode mode);
std::optional<ConflictMode> parse_conflict_mode(std::string_view text);

// Everything needed to turn a network into a solved instance. The CLI, the
// service and the trial runner all go through optimize().
struct EngineOptions {
  Backend backend = Backend::Exact;
  std::string solver_command;  // external backend; empty falls back to $SOLVER_CMD
  SolveLimits limits;
  int discretization = 200;
  std::optional<double> mu;
  QualityFamilies families;
  ConflictMode conflict_mode = ConflictMode::ExclusiveOptions;
  std::optional<std::vector<OptionGroup>> options;  // default: option groups declared on edges
};

struct OptimizeResult {
  Solution solution;  // on the original network's element ids
  CountProfile profile;
};

// Raised by optimize() for networks that fail validation.
class ValidationFailed : public Error {
 public:
  explicit ValidationFailed(ValidationReport report);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

std::string solver_command_or_env(const std::string& configured);

// Validates, canonicalizes, builds, solves and maps the solution back.
OptimizeResult optimize(const Network& net, const Objective& objective, const EngineOptions& opts);

// Objective taken from the network document when `explicit_objective` is empty.
Objective resolve_objective(const Network& net, const std::optional<Objective>& explicit_objective);

Json engine_options_to_json(const EngineOptions& opts);
// Missing keys keep the defaults in `base`.
EngineOptions engine_options_from_json(const Json& doc, EngineOptions base = {});

}  // namespace wnopt
