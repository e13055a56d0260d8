#include "wnopt/solution.hpp"

#include <array>
#include <utility>

#include "wnopt/error.hpp"

namespace wnopt {

namespace {

constexpr std::array<std::pair<SolveStatus, std::string_view>, 5> kStatusNames{{
    {SolveStatus::Optimal, "optimal"},
    {SolveStatus::FeasibleWithinGap, "feasible_within_gap"},
    {SolveStatus::Infeasible, "infeasible"},
    {SolveStatus::TimedOut, "timed_out"},
    {SolveStatus::Unbounded, "unbounded"},
}};

template <typename T>
Json map_to_json(const std::map<std::string, T>& m) {
  Json out = Json::object();
  for (const auto& [k, v] : m) out[k] = v;
  return out;
}

template <typename T>
std::map<std::string, T> map_from_json(const Json& doc, std::string_view key) {
  std::map<std::string, T> out;
  auto it = doc.find(key);
  if (it == doc.end()) return out;
  if (!it->is_object()) throw Error(ErrorCode::ParseError, std::string(key) + " must be an object");
  for (const auto& [k, v] : it->items()) {
    if (!v.is_number()) throw Error(ErrorCode::ParseError, std::string(key) + "." + k + " must be a number");
    out[k] = v.template get<T>();
  }
  return out;
}

}  // namespace

std::string_view to_string(SolveStatus status) {
  for (const auto& [s, name] : kStatusNames) {
    if (s == status) return name;
  }
  return "unknown";
}

std::optional<SolveStatus> parse_solve_status(std::string_view text) {
  for (const auto& [s, name] : kStatusNames) {
    if (name == text) return s;
  }
  return std::nullopt;
}

double Solution::flow(std::string_view edge_id) const {
  auto it = flows.find(std::string(edge_id));
  return it == flows.end() ? 0.0 : it->second;
}

Json solution_to_json(const Solution& sol) {
  Json out = Json::object();
  out["status"] = std::string(to_string(sol.status));
  out["objective_value"] = sol.objective_value;
  out["gap"] = sol.gap;
  out["discretization"] = sol.discretization;
  out["flows"] = map_to_json(sol.flows);
  out["edge_use"] = map_to_json(sol.edge_use);
  Json conc = Json::object();
  for (const auto& [c, values] : sol.concentrations) conc[c] = map_to_json(values);
  out["concentrations"] = std::move(conc);
  out["blend_parts"] = map_to_json(sol.blend_parts);
  out["options"] = map_to_json(sol.options);
  return out;
}

Solution solution_from_json(const Json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, "solution must be an object");
  Solution sol;
  const auto status = json_field::required_string(doc, "status");
  auto parsed = parse_solve_status(status);
  if (!parsed) throw Error(ErrorCode::ParseError, "unknown status '" + status + "'");
  sol.status = *parsed;
  sol.objective_value = json_field::number(doc, "objective_value").value_or(0.0);
  sol.gap = json_field::number(doc, "gap").value_or(0.0);
  sol.discretization = static_cast<int>(json_field::number(doc, "discretization").value_or(0.0));
  sol.flows = map_from_json<double>(doc, "flows");
  sol.edge_use = map_from_json<int>(doc, "edge_use");
  sol.blend_parts = map_from_json<int>(doc, "blend_parts");
  sol.options = map_from_json<int>(doc, "options");
  if (auto it = doc.find("concentrations"); it != doc.end()) {
    if (!it->is_object()) throw Error(ErrorCode::ParseError, "concentrations must be an object");
    for (const auto& [c, values] : it->items()) {
      Json wrapper = Json::object();
      wrapper["v"] = values;
      sol.concentrations[c] = map_from_json<double>(wrapper, "v");
    }
  }
  return sol;
}

}  // namespace wnopt
