#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wnopt/milp.hpp"
#include "wnopt/network.hpp"
#include "wnopt/network_io.hpp"

namespace wnopt {

using FlowMap = std::map<std::string, double>;                                   // edge id -> flow
using ConcentrationMap = std::map<std::string, std::map<std::string, double>>;  // component -> pollutant -> value

struct CheckTolerances {
  double flow = 1e-6;     // absolute
  double quality = 1e-6;  // relative to max(1, |limit|)
  double mu = 1e-3;       // minimum flow on a used edge
  QualityFamilies families;
};

struct ConstraintViolation {
  std::string tag;
  std::string element;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // amount by which the constraint is missed
};

struct FeasibilityReport {
  std::vector<ConstraintViolation> violations;
  bool feasible = true;
  std::optional<double> objective_value;
};

// Exit concentrations of every component with positive inflow (and every
// provider), by a topological sweep. Inactive components are absent.
// Throws Error(Cyclic) and Error(MissingQuality).
ConcentrationMap propagate_quality(const Network& net, const FlowMap& flows, double flow_tol = 1e-6);

// Flow-weighted mean of the upstream exit concentrations entering each
// active non-provider component.
ConcentrationMap inlet_quality(const Network& net, const FlowMap& flows, double flow_tol = 1e-6);

// Evaluates the nonlinear model directly on concrete flows. Violations are
// data; only structural problems (cycles, missing provider quality) throw.
FeasibilityReport check_feasibility(const Network& net, const FlowMap& flows, const CheckTolerances& tol = {},
                                    const std::optional<Objective>& objective = std::nullopt);

// The objective expression of the linear model evaluated on concrete flows,
// with an edge counted as used when its flow exceeds `flow_tol`.
double evaluate_objective(const Network& net, const Objective& objective, const FlowMap& flows,
                          double flow_tol = 1e-6);

struct BruteForceResult {
  bool found = false;
  FlowMap flows;
  double objective_value = 0.0;
  std::size_t points = 0;  // grid points evaluated
};

// Exhaustive search over flows on a grid of `grid_step`: provider totals and
// the first n-1 shares of every split are grid multiples, the last share takes
// the remainder, intermediates conserve flow exactly. Throws
// Error(ExplosionGuard) when the grid exceeds `max_points`.
BruteForceResult brute_force(const Network& net, const Objective& objective, double grid_step,
                             const CheckTolerances& tol = {}, double max_points = 1e8);

Json report_to_json(const FeasibilityReport& report);

}  // namespace wnopt
