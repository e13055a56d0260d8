#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "wnopt/network_io.hpp"

namespace wnopt {

enum class SolveStatus { Optimal, FeasibleWithinGap, Infeasible, TimedOut, Unbounded };

std::string_view to_string(SolveStatus status);
std::optional<SolveStatus> parse_solve_status(std::string_view text);

// True for statuses that carry a usable flow assignment.
inline bool has_flows(SolveStatus status) {
  return status == SolveStatus::Optimal || status == SolveStatus::FeasibleWithinGap;
}

// Solver output expressed on network elements rather than model columns.
struct Solution {
  SolveStatus status = SolveStatus::Infeasible;
  std::map<std::string, double> flows;  // edge id -> m3/h
  std::map<std::string, std::map<std::string, double>> concentrations;  // component -> pollutant -> value
  std::map<std::string, int> edge_use;     // edge id -> Y
  std::map<std::string, int> blend_parts;  // blending component -> k selected for its first inflow
  std::map<std::string, int> options;      // option name -> w
  int discretization = 0;                  // K
  double objective_value = 0.0;
  double gap = 0.0;
  double solve_time = 0.0;  // seconds; not part of the serialized document

  double flow(std::string_view edge_id) const;
};

// Serialized without solve_time so identical solves produce identical bytes.
Json solution_to_json(const Solution& sol);
Solution solution_from_json(const Json& doc);

}  // namespace wnopt
