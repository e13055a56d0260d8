#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "wnopt/milp.hpp"
#include "wnopt/solution.hpp"

namespace wnopt {

struct SolveLimits {
  double max_gap = 0.01;  // relative
  double max_time = 90.0;  // seconds
  std::size_t max_nodes = std::size_t{1} << 20;  // exact backend only
};

void validate_limits(const SolveLimits& limits);

// Branch-and-bound over the model's binaries: each blending point's z set is
// branched K+1 ways first, remaining binaries two ways. Node LPs are the model
// rows with fixed columns folded in and switched-off big-M rows dropped.
// Stops at max_time (TimedOut) and prunes within max_gap. Deterministic.
// Throws Error(BudgetExceeded) when max_nodes is reached.
Solution solve_exact(const MilpModel& model, const SolveLimits& limits = {});

// Writes the model as LP text, runs `command` with {model}, {solution},
// {gap} and {time} substituted, and parses the solution file it writes:
//   status <optimal|feasible_within_gap|infeasible|timed_out|unbounded>
//   objective <value>
//   gap <value>
//   <column name> <value>   (one per line)
// Throws Error(MissingSolver), Error(SolverCrash) with the captured log, or
// Error(ParseError) naming the offending line.
Solution solve_external(const MilpModel& model, const SolveLimits& limits, const std::string& command);

// Parses solver output in the format above against the model's columns.
Solution parse_solution_file(const MilpModel& model, const std::string& text);

// Expresses column values as a Solution on the model's (canonical) elements.
Solution solution_from_values(const MilpModel& model, const std::vector<double>& values, SolveStatus status,
                              double gap);

double objective_value(const MilpModel& model, const std::vector<double>& values);

}  // namespace wnopt
