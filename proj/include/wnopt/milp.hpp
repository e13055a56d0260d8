#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wnopt/network.hpp"
#include "wnopt/preprocess.hpp"
#include "wnopt/simplex.hpp"

namespace wnopt {

enum class VarType { Continuous, Binary };

struct Variable {
  std::string name;  // LP-safe column name
  VarType type = VarType::Continuous;
  double lower = 0.0;
  double upper = 0.0;  // +inf when unbounded
};

struct Term {
  std::size_t var;
  double coef;
};

// One linear constraint. `tag` names the formulation family the row comes
// from (nl1..nl16 for flow/quality rows of the nonlinear model that carry
// over unchanged, l1..l21 for the linearized blending rows, conflict); `element`
// is the network element the row is stated for.
struct Row {
  std::string tag;
  std::string element;
  std::vector<Term> terms;
  RowSense sense = RowSense::LessEqual;
  double rhs = 0.0;
  bool big_m = false;  // row is switched off by its binaries when they leave the gate
};

struct LinearObjective {
  Sense sense = Sense::Minimize;
  std::vector<Term> terms;
  double constant = 0.0;
};

struct BigMPolicy {
  double flow_m = 0.0;
  std::map<std::string, double> quality_m;  // per pollutant id
  double mu = 1e-3;
};

enum class ConflictMode { ExclusiveOptions, AllOptionsAvailable };

// A named edge set standing for one design alternative. Options sharing a
// `decision` are mutually exclusive in ExclusiveOptions mode.
struct OptionGroup {
  std::string name;
  std::string decision = "default";
  std::vector<std::string> edges;  // original edge ids
};

// Which quality-limit families to emit for components with a reduction rate.
struct QualityFamilies {
  bool exit_limits = true;        // c_j within [l*RR, u*RR]
  bool entry_limits_rr = false;   // weighted inlet mean within [l, u], as for RF components
};

struct BuildOptions {
  int discretization = 200;  // K
  std::optional<BigMPolicy> big_m;
  std::optional<double> mu;  // overrides the derived policy's mu
  std::vector<OptionGroup> options;
  ConflictMode conflict_mode = ConflictMode::ExclusiveOptions;
  QualityFamilies families;
};

struct BlendPoint {
  std::size_t component;    // canonical component index
  std::size_t first_edge;   // inflow carrying the z variables (smaller source id)
  std::size_t second_edge;
  std::vector<std::size_t> z;  // K+1 variables, z[k] <=> first inflow holds k of K parts
};

// Solver-agnostic linearized model plus the registry that maps columns back
// to network elements.
struct MilpModel {
  std::vector<Variable> variables;
  std::vector<Row> rows;
  LinearObjective objective;

  int discretization = 0;
  BigMPolicy policy;
  QualityFamilies families;
  std::vector<std::string> edge_ids;       // canonical edges
  std::vector<std::pair<std::size_t, std::size_t>> edge_ends;  // component indices (from, to)
  std::vector<std::string> component_ids;  // canonical components
  std::vector<std::string> pollutant_ids;
  std::vector<std::size_t> flow;                       // per edge: x_e
  std::vector<std::size_t> used;                       // per edge: Y_e
  std::vector<std::vector<std::size_t>> concentration;  // [component][pollutant]: c_jp
  std::vector<BlendPoint> blends;
  std::vector<std::pair<std::string, std::size_t>> option_vars;  // w_o

  std::size_t add_variable(std::string name, VarType type, double lower, double upper);
};

struct CountProfile {
  std::size_t continuous = 0;
  std::size_t binary = 0;
  std::size_t constraints = 0;

  friend bool operator==(const CountProfile&, const CountProfile&) = default;
};

// Flow bound from supplies, fixed outflows and capacities of providers and
// intermediates; quality bounds per pollutant. Throws Error(UnboundedBigM).
BigMPolicy derive_big_m(const CanonicalNetwork& net);

// Declares x, Y, c, z and w columns. Throws Error(InvalidArgument) for K < 1
// and Error(OverlappingOptions).
MilpModel declare_variables(const CanonicalNetwork& net, const BuildOptions& opts, const BigMPolicy& policy);

std::vector<Row> build_flow_constraints(const MilpModel& model, const CanonicalNetwork& net);
std::vector<Row> build_blending_constraints(const MilpModel& model, const CanonicalNetwork& net);
std::vector<Row> build_quality_constraints(const MilpModel& model, const CanonicalNetwork& net);
std::vector<Row> build_conflict_constraints(const MilpModel& model, const CanonicalNetwork& net,
                                            const std::vector<OptionGroup>& options, ConflictMode mode);
LinearObjective build_objective(const MilpModel& model, const CanonicalNetwork& net, const Objective& objective);

// Everything above, rows sorted by (tag, element) for byte-stable export.
MilpModel build_model(const CanonicalNetwork& net, const Objective& objective, const BuildOptions& opts);

CountProfile count_profile(const MilpModel& model);

// Closed-form profile: continuous = |E| + |I||P|, binary = |E| + B(K+1) + W.
CountProfile analytic_profile(std::size_t edges, std::size_t components_times_pollutants, std::size_t blend_points,
                              int discretization, std::size_t option_vars);

// CPLEX LP text, deterministic byte for byte for the same model.
std::string write_lp(const MilpModel& model);

// Option groups declared on edges (`option_group`). A label "decision:name"
// files the option under that decision; plain labels share "default".
std::vector<OptionGroup> options_from_edges(const Network& net);

}  // namespace wnopt
