#pragma once

#include <cstddef>
#include <vector>

namespace wnopt {

enum class RowSense { LessEqual, GreaterEqual, Equal };

struct LpRow {
  std::vector<std::pair<std::size_t, double>> terms;
  RowSense sense = RowSense::LessEqual;
  double rhs = 0.0;
};

// minimize cost . x subject to rows and lower <= x <= upper. Lower bounds
// must be finite; upper bounds may be +inf.
struct LpProblem {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> cost;
  std::vector<LpRow> rows;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
  std::size_t iterations = 0;
};

struct SimplexTolerances {
  double feasibility = 1e-9;
  double optimality = 1e-9;
  double pivot = 1e-12;  // smaller pivots raise NumericalBreakdown
};

// Dense two-phase bounded-variable primal simplex. Dantzig pricing, switching
// to Bland's rule after a run of degenerate pivots. Deterministic.
// Throws Error(InvalidArgument) for non-finite data and
// Error(NumericalBreakdown) on a vanishing pivot or iteration overrun.
LpResult simplex_lp(const LpProblem& lp, const SimplexTolerances& tol = {});

}  // namespace wnopt
