#include "wnopt/solver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <sstream>
#include <unordered_map>

#include <sys/wait.h>
#include <unistd.h>

#include "wnopt/error.hpp"

namespace wnopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kIntegrality = 1e-6;
constexpr double kFeasibility = 1e-9;

bool is_binary(const MilpModel& m, std::size_t v) { return m.variables[v].type == VarType::Binary; }

struct Bounds {
  std::vector<double> lo;
  std::vector<double> hi;
};

struct NodeLp {
  LpProblem lp;
  std::vector<std::size_t> column_var;  // LP column -> model variable
  double constant = 0.0;                // objective contribution of fixed columns (minimization form)
};

double sense_factor(const MilpModel& m) { return m.objective.sense == Sense::Minimize ? 1.0 : -1.0; }

bool tighten(const MilpModel& model, Bounds& b, std::size_t v, double lo, double hi, bool& changed) {
  if (is_binary(model, v)) {
    lo = std::ceil(lo - kIntegrality);
    hi = std::floor(hi + kIntegrality);
  }
  if (lo > b.lo[v] + kFeasibility) {
    b.lo[v] = lo;
    changed = true;
  }
  if (hi < b.hi[v] - kFeasibility) {
    b.hi[v] = hi;
    changed = true;
  }
  if (b.lo[v] > b.hi[v]) {
    if (b.lo[v] - b.hi[v] > kFeasibility * (1.0 + std::fabs(b.lo[v]))) return false;
    b.hi[v] = b.lo[v];
  }
  return true;
}

// Folds fixed columns into row constants, turns single-column rows into
// bounds, and drops rows that the column bounds already satisfy. Returns
// nullopt when the node is infeasible.
std::optional<NodeLp> fold(const MilpModel& model, Bounds& b) {
  const auto& rows = model.rows;
  std::vector<char> active(rows.size(), 1);
  auto fixed = [&](std::size_t v) { return b.hi[v] - b.lo[v] <= 0.0; };

  for (int pass = 0; pass < 50; ++pass) {
    bool changed = false;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (!active[r]) continue;
      const auto& row = rows[r];
      double constant = 0.0;
      double min_act = 0.0;
      double max_act = 0.0;
      std::size_t free_terms = 0;
      const Term* single = nullptr;
      for (const auto& t : row.terms) {
        if (fixed(t.var)) {
          constant += t.coef * b.lo[t.var];
          continue;
        }
        ++free_terms;
        single = &t;
        if (t.coef > 0) {
          min_act += t.coef * b.lo[t.var];
          max_act += t.coef * b.hi[t.var];
        } else {
          min_act += t.coef * b.hi[t.var];
          max_act += t.coef * b.lo[t.var];
        }
      }
      const double rhs = row.rhs - constant;
      const double tol = kFeasibility * (1.0 + std::fabs(row.rhs));
      const bool need_upper = row.sense != RowSense::GreaterEqual;
      const bool need_lower = row.sense != RowSense::LessEqual;
      if (need_upper && min_act > rhs + tol) return std::nullopt;
      if (need_lower && max_act < rhs - tol) return std::nullopt;
      const bool upper_ok = !need_upper || max_act <= rhs + tol;
      const bool lower_ok = !need_lower || min_act >= rhs - tol;
      if (upper_ok && lower_ok) {
        active[r] = 0;
        continue;
      }
      if (free_terms == 1) {
        const double bound = rhs / single->coef;
        double lo = -kInf;
        double hi = kInf;
        if (need_upper) (single->coef > 0 ? hi : lo) = bound;
        if (need_lower) (single->coef > 0 ? lo : hi) = bound;
        if (!tighten(model, b, single->var, std::max(lo, b.lo[single->var]), std::min(hi, b.hi[single->var]), changed)) {
          return std::nullopt;
        }
        active[r] = 0;
      }
    }
    if (!changed) break;
  }

  NodeLp node;
  std::vector<std::size_t> column(model.variables.size(), SIZE_MAX);
  for (std::size_t v = 0; v < model.variables.size(); ++v) {
    if (fixed(v)) continue;
    column[v] = node.column_var.size();
    node.column_var.push_back(v);
    node.lp.lower.push_back(b.lo[v]);
    node.lp.upper.push_back(b.hi[v]);
    node.lp.cost.push_back(0.0);
  }
  const double sf = sense_factor(model);
  for (const auto& t : model.objective.terms) {
    if (column[t.var] == SIZE_MAX) {
      node.constant += sf * t.coef * b.lo[t.var];
    } else {
      node.lp.cost[column[t.var]] += sf * t.coef;
    }
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!active[r]) continue;
    LpRow lr;
    lr.sense = rows[r].sense;
    lr.rhs = rows[r].rhs;
    for (const auto& t : rows[r].terms) {
      if (column[t.var] == SIZE_MAX) {
        lr.rhs -= t.coef * b.lo[t.var];
      } else {
        lr.terms.push_back({column[t.var], t.coef});
      }
    }
    node.lp.rows.push_back(std::move(lr));
  }
  return node;
}

struct NodeSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> values;
  double bound = 0.0;  // minimization form
};

NodeSolution solve_node(const MilpModel& model, Bounds& b) {
  NodeSolution out;
  auto node = fold(model, b);
  if (!node) return out;
  auto lp = simplex_lp(node->lp);
  out.status = lp.status;
  if (lp.status != LpStatus::Optimal) return out;
  out.values = b.lo;
  for (std::size_t c = 0; c < node->column_var.size(); ++c) out.values[node->column_var[c]] = lp.x[c];
  out.bound = lp.objective + node->constant;
  return out;
}

double fractionality(double v) { return std::fabs(v - std::round(v)); }

struct OpenNode {
  Bounds bounds;
  double parent_bound;
};

}  // namespace

void validate_limits(const SolveLimits& limits) {
  if (!(limits.max_gap >= 0.0) || !std::isfinite(limits.max_gap)) {
    throw Error(ErrorCode::InvalidArgument, "max_gap must be a non-negative number");
  }
  if (!(limits.max_time > 0.0)) throw Error(ErrorCode::InvalidArgument, "max_time must be positive");
}

double objective_value(const MilpModel& model, const std::vector<double>& values) {
  double v = model.objective.constant;
  for (const auto& t : model.objective.terms) v += t.coef * values[t.var];
  return v;
}

Solution solution_from_values(const MilpModel& model, const std::vector<double>& values, SolveStatus status,
                              double gap) {
  Solution sol;
  sol.status = status;
  sol.gap = gap;
  sol.discretization = model.discretization;
  if (values.empty()) return sol;
  sol.objective_value = objective_value(model, values);

  std::vector<double> inflow(model.component_ids.size(), 0.0);
  std::vector<double> outflow(model.component_ids.size(), 0.0);
  for (std::size_t e = 0; e < model.edge_ids.size(); ++e) {
    const double x = values[model.flow[e]];
    sol.flows[model.edge_ids[e]] = x;
    sol.edge_use[model.edge_ids[e]] = static_cast<int>(std::lround(values[model.used[e]]));
    outflow[model.edge_ends[e].first] += x;
    inflow[model.edge_ends[e].second] += x;
  }
  for (std::size_t j = 0; j < model.component_ids.size(); ++j) {
    if (inflow[j] <= 1e-6 && outflow[j] <= 1e-6) continue;
    auto& conc = sol.concentrations[model.component_ids[j]];
    for (std::size_t p = 0; p < model.pollutant_ids.size(); ++p) {
      conc[model.pollutant_ids[p]] = values[model.concentration[j][p]];
    }
  }
  for (const auto& blend : model.blends) {
    for (std::size_t k = 0; k < blend.z.size(); ++k) {
      if (values[blend.z[k]] > 0.5) sol.blend_parts[model.component_ids[blend.component]] = static_cast<int>(k);
    }
  }
  for (const auto& [name, var] : model.option_vars) sol.options[name] = static_cast<int>(std::lround(values[var]));
  return sol;
}

Solution solve_exact(const MilpModel& model, const SolveLimits& limits) {
  validate_limits(limits);
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  const std::size_t n = model.variables.size();
  Bounds root;
  root.lo.resize(n);
  root.hi.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    root.lo[v] = model.variables[v].lower;
    root.hi[v] = model.variables[v].upper;
  }

  std::vector<char> in_blend(n, 0);
  for (const auto& b : model.blends) {
    for (auto z : b.z) in_blend[z] = 1;
  }
  // Upstream blends first, so fixed ratios propagate concentrations downstream.
  std::vector<const BlendPoint*> blends;
  {
    const std::size_t nc = model.component_ids.size();
    std::vector<std::size_t> indegree(nc, 0), rank(nc, 0);
    for (const auto& [from, to] : model.edge_ends) ++indegree[to];
    std::vector<std::size_t> ready;
    for (std::size_t c = nc; c-- > 0;) {
      if (!indegree[c]) ready.push_back(c);
    }
    for (std::size_t next = 0; !ready.empty(); ++next) {
      const std::size_t c = ready.back();
      ready.pop_back();
      rank[c] = next;
      for (const auto& [from, to] : model.edge_ends) {
        if (from == c && --indegree[to] == 0) ready.push_back(to);
      }
    }
    for (const auto& b : model.blends) blends.push_back(&b);
    std::stable_sort(blends.begin(), blends.end(),
                     [&](const BlendPoint* a, const BlendPoint* b) { return rank[a->component] < rank[b->component]; });
  }
  std::vector<char> is_option(n, 0);
  for (const auto& [name, var] : model.option_vars) is_option[var] = 1;

  std::vector<double> incumbent;
  double incumbent_bound = kInf;  // minimization form
  double gap_pruned_bound = kInf;
  std::size_t nodes = 0;
  bool timed_out = false;

  // A node is discarded when its bound cannot beat the incumbent by more than the gap allowance.
  auto prunable = [&](double bound) {
    if (!std::isfinite(incumbent_bound)) return false;
    const double exact = 1e-9 * std::max(1.0, std::fabs(incumbent_bound));
    const double slack = std::max(exact, limits.max_gap * std::fabs(incumbent_bound));
    if (bound < incumbent_bound - slack) return false;
    if (bound < incumbent_bound - exact) gap_pruned_bound = std::min(gap_pruned_bound, bound);
    return true;
  };

  std::vector<OpenNode> stack;
  stack.push_back({std::move(root), -kInf});
  while (!stack.empty()) {
    if (elapsed() > limits.max_time) {
      timed_out = true;
      break;
    }
    if (++nodes > limits.max_nodes) {
      throw Error(ErrorCode::BudgetExceeded, "node budget of " + std::to_string(limits.max_nodes) + " reached with " +
                                                 std::to_string(stack.size()) + " open nodes remaining");
    }
    OpenNode node = std::move(stack.back());
    stack.pop_back();
    if (prunable(node.parent_bound)) continue;

    auto result = solve_node(model, node.bounds);
    if (result.status == LpStatus::Infeasible) continue;
    if (result.status == LpStatus::Unbounded) {
      if (nodes == 1) {
        Solution sol;
        sol.status = SolveStatus::Unbounded;
        sol.discretization = model.discretization;
        sol.solve_time = elapsed();
        return sol;
      }
      throw Error(ErrorCode::NumericalBreakdown, "unbounded relaxation below a bounded root");
    }
    if (prunable(result.bound)) continue;
    const auto& x = result.values;

    // Design decisions first: they switch whole branches of the network off.
    std::size_t option_var = n;
    for (const auto& [name, var] : model.option_vars) {
      if (fractionality(x[var]) > kIntegrality) {
        option_var = var;
        break;
      }
    }
    if (option_var != n) {
      const double first = x[option_var] >= 0.5 ? 1.0 : 0.0;
      for (double value : {1.0 - first, first}) {
        OpenNode child{node.bounds, result.bound};
        child.bounds.lo[option_var] = child.bounds.hi[option_var] = value;
        stack.push_back(std::move(child));
      }
      continue;
    }

    // Then blending points: a fractional z set splits K+1 ways.
    const BlendPoint* branch_blend = nullptr;
    for (const auto* b : blends) {
      for (auto z : b->z) {
        if (fractionality(x[z]) > kIntegrality) {
          branch_blend = b;
          break;
        }
      }
      if (branch_blend) break;
    }
    if (branch_blend) {
      std::vector<std::size_t> order(branch_blend->z.size());
      for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t c) { return x[branch_blend->z[a]] > x[branch_blend->z[c]]; });
      for (auto it = order.rbegin(); it != order.rend(); ++it) {
        OpenNode child{node.bounds, result.bound};
        bool possible = true;
        for (std::size_t k = 0; k < branch_blend->z.size(); ++k) {
          const auto z = branch_blend->z[k];
          const double value = k == *it ? 1.0 : 0.0;
          if (value < child.bounds.lo[z] || value > child.bounds.hi[z]) possible = false;
          child.bounds.lo[z] = child.bounds.hi[z] = value;
        }
        if (possible) stack.push_back(std::move(child));
      }
      continue;
    }

    std::size_t branch_var = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (is_binary(model, v) && !in_blend[v] && !is_option[v] && fractionality(x[v]) > kIntegrality) {
        branch_var = v;
        break;
      }
    }
    if (branch_var != n) {
      const double first = x[branch_var] >= 0.5 ? 1.0 : 0.0;
      for (double value : {1.0 - first, first}) {
        OpenNode child{node.bounds, result.bound};
        child.bounds.lo[branch_var] = child.bounds.hi[branch_var] = value;
        stack.push_back(std::move(child));
      }
      continue;
    }

    // Integral within tolerance: fix binaries exactly and re-solve the continuous part.
    Bounds polished = node.bounds;
    for (std::size_t v = 0; v < n; ++v) {
      if (is_binary(model, v)) polished.lo[v] = polished.hi[v] = std::round(x[v]);
    }
    auto leaf = solve_node(model, polished);
    if (leaf.status != LpStatus::Optimal) {
      std::size_t widest = n;
      double worst = 0.0;
      for (std::size_t v = 0; v < n; ++v) {
        if (!is_binary(model, v)) continue;
        const double f = fractionality(x[v]);
        if (f > worst && node.bounds.lo[v] != node.bounds.hi[v]) {
          worst = f;
          widest = v;
        }
      }
      if (widest == n) continue;
      for (double value : {1.0 - std::round(x[widest]), std::round(x[widest])}) {
        OpenNode child{node.bounds, result.bound};
        child.bounds.lo[widest] = child.bounds.hi[widest] = value;
        stack.push_back(std::move(child));
      }
      continue;
    }
    if (incumbent.empty() || leaf.bound < incumbent_bound - 1e-12 * std::max(1.0, std::fabs(incumbent_bound))) {
      incumbent_bound = leaf.bound;
      incumbent = leaf.values;
    }
  }

  SolveStatus status;
  double gap = 0.0;
  double open_bound = gap_pruned_bound;
  if (timed_out) {
    for (const auto& node : stack) open_bound = std::min(open_bound, node.parent_bound);
  }
  if (incumbent.empty()) {
    status = timed_out ? SolveStatus::TimedOut : SolveStatus::Infeasible;
    gap = timed_out ? 1.0 : 0.0;
  } else {
    if (std::isfinite(open_bound) || (timed_out && !stack.empty())) {
      const double denom = std::max(std::fabs(incumbent_bound), 1e-9);
      gap = std::isfinite(open_bound) ? std::max(0.0, (incumbent_bound - open_bound) / denom) : 1.0;
    }
    if (timed_out) {
      status = gap <= limits.max_gap ? SolveStatus::FeasibleWithinGap : SolveStatus::TimedOut;
    } else {
      status = gap > 0.0 ? SolveStatus::FeasibleWithinGap : SolveStatus::Optimal;
    }
  }
  Solution sol = solution_from_values(model, incumbent, status, gap);
  sol.solve_time = elapsed();
  return sol;
}

namespace {

std::string substitute(std::string text, const std::string& key, const std::string& value) {
  for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size())) {
    text.replace(pos, key.size(), value);
  }
  return text;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

std::filesystem::path make_work_dir() {
  static std::atomic<unsigned long> counter{0};
  auto dir = std::filesystem::temp_directory_path() /
             ("wnopt-" + std::to_string(::getpid()) + "-" + std::to_string(counter.fetch_add(1)));
  std::filesystem::create_directories(dir);
  return dir;
}

double parse_number(const std::string& token, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": '" + token + "' is not a number");
  }
}

}  // namespace

Solution parse_solution_file(const MilpModel& model, const std::string& text) {
  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t v = 0; v < model.variables.size(); ++v) column[model.variables[v].name] = v;

  std::optional<SolveStatus> status;
  double gap = 0.0;
  std::vector<double> values(model.variables.size(), 0.0);
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::istringstream fields(line);
    std::string key, value, extra;
    if (!(fields >> key) || key.front() == '#') continue;
    if (!(fields >> value) || (fields >> extra)) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(number) + ": expected '<name> <value>'");
    }
    if (key == "status") {
      status = parse_solve_status(value);
      if (!status) throw Error(ErrorCode::ParseError, "line " + std::to_string(number) + ": unknown status '" + value + "'");
    } else if (key == "objective") {
      parse_number(value, number);
    } else if (key == "gap") {
      gap = parse_number(value, number);
    } else {
      auto it = column.find(key);
      if (it == column.end()) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(number) + ": unknown column '" + key + "'");
      }
      values[it->second] = parse_number(value, number);
    }
  }
  if (!status) throw Error(ErrorCode::ParseError, "solution file has no status line");
  if (!has_flows(*status)) {
    Solution sol;
    sol.status = *status;
    sol.gap = gap;
    sol.discretization = model.discretization;
    return sol;
  }
  for (std::size_t v = 0; v < values.size(); ++v) {
    if (model.variables[v].type == VarType::Binary) values[v] = std::round(values[v]);
  }
  return solution_from_values(model, values, *status, gap);
}

Solution solve_external(const MilpModel& model, const SolveLimits& limits, const std::string& command) {
  validate_limits(limits);
  if (command.empty()) throw Error(ErrorCode::MissingSolver, "no solver command configured (set SOLVER_CMD)");
  const auto start = std::chrono::steady_clock::now();
  const auto dir = make_work_dir();
  const auto model_path = dir / "model.lp";
  const auto solution_path = dir / "solution.txt";
  const auto log_path = dir / "solver.log";
  write_file_atomic(model_path, write_lp(model));

  std::ostringstream gap, time;
  gap.precision(17);
  time.precision(17);
  gap << limits.max_gap;
  time << limits.max_time;
  std::string cmd = command;
  cmd = substitute(cmd, "{model}", shell_quote(model_path.string()));
  cmd = substitute(cmd, "{solution}", shell_quote(solution_path.string()));
  cmd = substitute(cmd, "{gap}", gap.str());
  cmd = substitute(cmd, "{time}", time.str());
  cmd = "(" + cmd + ") > " + shell_quote(log_path.string()) + " 2>&1";

  const int raw = std::system(cmd.c_str());
  const int code = raw == -1 ? -1 : (WIFEXITED(raw) ? WEXITSTATUS(raw) : 128 + WTERMSIG(raw));
  std::string log;
  if (std::filesystem::exists(log_path)) log = read_file(log_path);
  auto cleanup = [&] {
    std::error_code ec;
    std::filesystem::remove_all(dir, ec);
  };
  if (code == 127 || code == 126) {
    cleanup();
    throw Error(ErrorCode::MissingSolver, "solver command could not be executed: " + log);
  }
  if (code != 0) {
    cleanup();
    throw Error(ErrorCode::SolverCrash, "solver exited with status " + std::to_string(code) + ": " + log);
  }
  if (!std::filesystem::exists(solution_path)) {
    cleanup();
    throw Error(ErrorCode::SolverCrash, "solver wrote no solution file: " + log);
  }
  const auto text = read_file(solution_path);
  cleanup();
  Solution sol;
  try {
    sol = parse_solution_file(model, text);
  } catch (const Error& e) {
    std::string message = e.what();
    message = message.substr(message.find(": ") + 2);
    throw Error(ErrorCode::ParseError, message + "; solver log: " + log);
  }
  sol.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

}  // namespace wnopt
