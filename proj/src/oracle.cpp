#include "wnopt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "wnopt/error.hpp"
#include "wnopt/preprocess.hpp"

namespace wnopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const QualityAttrs* quality_of(const Component& c, const std::string& pollutant) {
  auto it = c.attrs.quality.find(pollutant);
  return it == c.attrs.quality.end() ? nullptr : &it->second;
}

// Per component index: inlet mean and exit concentration per pollutant index;
// empty vectors mark inactive components.
struct Propagation {
  std::vector<std::vector<double>> inlet;
  std::vector<std::vector<double>> exit;
};

Propagation propagate(const Network& net, const Topology& topo, const std::vector<double>& x, double flow_tol) {
  topo.require_resolved();
  const auto& order = topo.topological_order();
  if (!order) throw Error(ErrorCode::Cyclic, "quality propagation needs an acyclic network");
  const auto np = net.pollutants.size();
  Propagation out;
  out.inlet.assign(net.components.size(), {});
  out.exit.assign(net.components.size(), {});
  for (auto j : *order) {
    const auto& comp = net.components[j];
    const auto& in = topo.in_edges(j);
    if (in.empty()) {
      if (topo.out_edges(j).empty()) continue;
      out.exit[j].resize(np);
      for (std::size_t p = 0; p < np; ++p) {
        const auto* q = quality_of(comp, net.pollutants[p].id);
        if (!q || !q->given) {
          throw Error(ErrorCode::MissingQuality,
                      "provider '" + comp.id + "' has no given quality for '" + net.pollutants[p].id + "'");
        }
        out.exit[j][p] = *q->given;
      }
      continue;
    }
    double inflow = 0.0;
    for (auto e : in) inflow += x[e];
    if (inflow <= flow_tol) continue;
    out.inlet[j].assign(np, 0.0);
    out.exit[j].assign(np, 0.0);
    for (std::size_t p = 0; p < np; ++p) {
      double weighted = 0.0;
      double weight = 0.0;
      for (auto e : in) {
        const auto src = topo.from_index(e);
        if (x[e] <= 0.0 || out.exit[src].empty()) continue;
        weighted += x[e] * out.exit[src][p];
        weight += x[e];
      }
      const double mean = weight > 0.0 ? weighted / weight : 0.0;
      out.inlet[j][p] = mean;
      const auto* q = quality_of(comp, net.pollutants[p].id);
      if (q && q->fixed_exit) {
        out.exit[j][p] = *q->fixed_exit;
      } else {
        out.exit[j][p] = (q && q->reduction_rate ? *q->reduction_rate : 1.0) * mean;
      }
    }
  }
  return out;
}

std::vector<double> flows_by_index(const Topology& topo, const Network& net, const FlowMap& flows,
                                   std::vector<std::string>* unknown) {
  std::vector<double> x(net.edges.size(), 0.0);
  for (const auto& [id, value] : flows) {
    if (auto e = topo.edge_index(id)) {
      x[*e] = value;
    } else if (unknown) {
      unknown->push_back(id);
    }
  }
  return x;
}

ConcentrationMap to_map(const Network& net, const std::vector<std::vector<double>>& values) {
  ConcentrationMap out;
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (values[j].empty()) continue;
    auto& m = out[net.components[j].id];
    for (std::size_t p = 0; p < values[j].size(); ++p) m[net.pollutants[p].id] = values[j][p];
  }
  return out;
}

class Checker {
 public:
  Checker(const Network& net, const Topology& topo, const CheckTolerances& tol) : net_(net), topo_(topo), tol_(tol) {}

  // Appends violations to `report` when given; with report == nullptr stops at the first one.
  bool check(const std::vector<double>& x, std::vector<ConstraintViolation>* report) const {
    stop_early_ = report == nullptr;
    sink_ = report;
    failed_ = false;

    for (std::size_t e = 0; e < net_.edges.size(); ++e) {
      const auto id = net_.edges[e].id();
      if (!(x[e] >= -tol_.flow)) add("bounds", id, x[e], 0.0, -x[e]);
      if (net_.edges[e].capacity && x[e] > *net_.edges[e].capacity + tol_.flow) {
        add("nl5", id, x[e], *net_.edges[e].capacity, x[e] - *net_.edges[e].capacity);
      }
      if (x[e] > tol_.flow && x[e] < tol_.mu - tol_.flow) add("nl6", id, x[e], tol_.mu, tol_.mu - x[e]);
      if (done()) return false;
    }

    for (std::size_t j = 0; j < net_.components.size(); ++j) {
      const auto& c = net_.components[j];
      const auto& a = c.attrs;
      const auto& in = topo_.in_edges(j);
      const auto& out = topo_.out_edges(j);
      double inflow = 0.0;
      double outflow = 0.0;
      for (auto e : in) inflow += x[e];
      for (auto e : out) outflow += x[e];

      if (in.empty() && !out.empty() && a.supply && *a.supply > 0.0 && std::fabs(outflow - *a.supply) > tol_.flow) {
        add("nl1", c.id, outflow, *a.supply, std::fabs(outflow - *a.supply));
      }
      if (out.empty() && !in.empty() && a.demand && *a.demand > 0.0 && inflow < *a.demand - tol_.flow) {
        add("nl2", c.id, inflow, *a.demand, *a.demand - inflow);
      }
      if (a.capacity) {
        if (!in.empty() && inflow > *a.capacity + tol_.flow) add("nl3", c.id, inflow, *a.capacity, inflow - *a.capacity);
        if (!out.empty() && outflow > *a.capacity + tol_.flow) {
          add("nl4", c.id, outflow, *a.capacity, outflow - *a.capacity);
        }
      }
      if (!in.empty() && !out.empty()) {
        if (a.fixed_outflow) {
          if (inflow > tol_.flow) {
            if (std::fabs(outflow - *a.fixed_outflow) > tol_.flow) {
              add("nl8", c.id, outflow, *a.fixed_outflow, std::fabs(outflow - *a.fixed_outflow));
            }
          } else if (outflow > tol_.flow) {
            add("nl10", c.id, outflow, 0.0, outflow);
          }
        } else {
          const double expected = a.reduction_rate.value_or(1.0) * inflow;
          if (std::fabs(outflow - expected) > tol_.flow) {
            add("nl7", c.id, outflow, expected, std::fabs(outflow - expected));
          }
        }
      }
      if (done()) return false;
    }

    const auto q = propagate(net_, topo_, x, tol_.flow);
    for (std::size_t j = 0; j < net_.components.size(); ++j) {
      if (q.inlet[j].empty()) continue;
      const auto& c = net_.components[j];
      for (std::size_t p = 0; p < net_.pollutants.size(); ++p) {
        const auto* qa = quality_of(c, net_.pollutants[p].id);
        if (!qa) continue;
        const auto element = c.id + "/" + net_.pollutants[p].id;
        const bool entry = qa->fixed_exit.has_value() || tol_.families.entry_limits_rr;
        if (entry) {
          const double mean = q.inlet[j][p];
          if (qa->lower) lower_limit("nl17", element, mean, *qa->lower);
          if (qa->upper) upper_limit("nl18", element, mean, *qa->upper);
        }
        if (!qa->fixed_exit && tol_.families.exit_limits) {
          const double rate = qa->reduction_rate.value_or(1.0);
          const double value = q.exit[j][p];
          if (qa->lower) lower_limit("nl13", element, value, *qa->lower * rate);
          if (qa->upper) upper_limit("nl14", element, value, *qa->upper * rate);
        }
        if (done()) return false;
      }
    }
    return !failed_;
  }

 private:
  void lower_limit(const char* tag, const std::string& element, double value, double limit) const {
    if (value < limit - tol_.quality * std::max(1.0, std::fabs(limit))) add(tag, element, value, limit, limit - value);
  }
  void upper_limit(const char* tag, const std::string& element, double value, double limit) const {
    if (value > limit + tol_.quality * std::max(1.0, std::fabs(limit))) add(tag, element, value, limit, value - limit);
  }
  void add(const std::string& tag, const std::string& element, double lhs, double rhs, double slack) const {
    failed_ = true;
    if (sink_) sink_->push_back({tag, element, lhs, rhs, slack});
  }
  bool done() const { return stop_early_ && failed_; }

  const Network& net_;
  const Topology& topo_;
  CheckTolerances tol_;
  mutable bool stop_early_ = false;
  mutable bool failed_ = false;
  mutable std::vector<ConstraintViolation>* sink_ = nullptr;
};

// The linear model's objective expression, evaluated on original-edge flows.
class ObjectiveEvaluator {
 public:
  ObjectiveEvaluator(const Network& net, const Objective& objective, double flow_tol)
      : canon_(canonicalize(net)), canon_topo_(canon_.network), flow_tol_(flow_tol) {
    BuildOptions opts;
    opts.discretization = 1;
    BigMPolicy policy;
    policy.flow_m = 1.0;
    model_ = declare_variables(canon_, opts, policy);
    model_.objective = build_objective(model_, canon_, objective);

    Topology original(net);
    source_.assign(canon_.network.edges.size(), SIZE_MAX);
    for (std::size_t e = 0; e < canon_.network.edges.size(); ++e) {
      const auto id = canon_.network.edges[e].id();
      auto origin = canon_.origin_map.find(id);
      const auto& orig_id = origin == canon_.origin_map.end() ? id : origin->second;
      if (auto oe = original.edge_index(orig_id)) source_[e] = *oe;
    }
    order_ = *canon_topo_.topological_order();
  }

  double operator()(const std::vector<double>& x) const {
    std::vector<double> values(model_.variables.size(), 0.0);
    std::vector<double> canon_x(canon_.network.edges.size(), 0.0);
    for (std::size_t e = 0; e < canon_x.size(); ++e) {
      if (source_[e] != SIZE_MAX) canon_x[e] = x[source_[e]];
    }
    // Dummy components pass their inflow through unchanged.
    for (auto j : order_) {
      if (!canon_.is_inserted_component(canon_.network.components[j].id)) continue;
      double inflow = 0.0;
      for (auto e : canon_topo_.in_edges(j)) inflow += canon_x[e];
      for (auto e : canon_topo_.out_edges(j)) canon_x[e] = inflow;
    }
    for (std::size_t e = 0; e < canon_x.size(); ++e) {
      values[model_.flow[e]] = canon_x[e];
      values[model_.used[e]] = canon_x[e] > flow_tol_ ? 1.0 : 0.0;
    }
    double v = model_.objective.constant;
    for (const auto& t : model_.objective.terms) v += t.coef * values[t.var];
    return v;
  }

 private:
  CanonicalNetwork canon_;
  Topology canon_topo_;
  MilpModel model_;
  std::vector<std::size_t> source_;
  std::vector<std::size_t> order_;
  double flow_tol_;
};

}  // namespace

ConcentrationMap propagate_quality(const Network& net, const FlowMap& flows, double flow_tol) {
  Topology topo(net);
  auto x = flows_by_index(topo, net, flows, nullptr);
  return to_map(net, propagate(net, topo, x, flow_tol).exit);
}

ConcentrationMap inlet_quality(const Network& net, const FlowMap& flows, double flow_tol) {
  Topology topo(net);
  auto x = flows_by_index(topo, net, flows, nullptr);
  return to_map(net, propagate(net, topo, x, flow_tol).inlet);
}

double evaluate_objective(const Network& net, const Objective& objective, const FlowMap& flows, double flow_tol) {
  Topology topo(net);
  ObjectiveEvaluator eval(net, objective, flow_tol);
  return eval(flows_by_index(topo, net, flows, nullptr));
}

FeasibilityReport check_feasibility(const Network& net, const FlowMap& flows, const CheckTolerances& tol,
                                    const std::optional<Objective>& objective) {
  Topology topo(net);
  topo.require_resolved();
  if (!topo.topological_order()) throw Error(ErrorCode::Cyclic, "cannot check a cyclic network");
  FeasibilityReport report;
  std::vector<std::string> unknown;
  auto x = flows_by_index(topo, net, flows, &unknown);
  for (const auto& id : unknown) report.violations.push_back({"unknown_edge", id, 0.0, 0.0, 0.0});
  Checker checker(net, topo, tol);
  checker.check(x, &report.violations);
  report.feasible = report.violations.empty();
  if (objective) report.objective_value = ObjectiveEvaluator(net, *objective, tol.flow)(x);
  return report;
}

BruteForceResult brute_force(const Network& net, const Objective& objective, double grid_step,
                             const CheckTolerances& tol, double max_points) {
  if (!(grid_step > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid_step must be positive");
  Topology topo(net);
  topo.require_resolved();
  const auto& order_opt = topo.topological_order();
  if (!order_opt) throw Error(ErrorCode::Cyclic, "cannot search a cyclic network");
  const auto& order = *order_opt;
  const auto n = net.components.size();

  // Upper bounds on node outflow, for the grid-size guard.
  std::vector<double> out_bound(n, 0.0), edge_bound(net.edges.size(), kInf);
  double points = 1.0;
  for (auto j : order) {
    const auto& a = net.components[j].attrs;
    const auto& in = topo.in_edges(j);
    const auto& out = topo.out_edges(j);
    if (out.empty()) continue;
    double bound;
    if (in.empty()) {
      if (a.supply) {
        bound = *a.supply;
      } else {
        bound = a.capacity.value_or(kInf);
        double edges = 0.0;
        for (auto e : out) edges += net.edges[e].capacity.value_or(kInf);
        bound = std::min(bound, edges);
        if (!std::isfinite(bound)) {
          throw Error(ErrorCode::InvalidArgument, "provider '" + net.components[j].id + "' has no finite flow bound");
        }
        points *= std::floor(bound / grid_step) + 1.0;
      }
    } else {
      double inflow = 0.0;
      for (auto e : in) inflow += edge_bound[e];
      bound = a.fixed_outflow ? *a.fixed_outflow : a.reduction_rate.value_or(1.0) * inflow;
    }
    if (a.capacity) bound = std::min(bound, *a.capacity);
    out_bound[j] = bound;
    for (auto e : out) edge_bound[e] = std::min(bound, net.edges[e].capacity.value_or(kInf));
    if (out.size() > 1) points *= std::pow(std::floor(bound / grid_step) + 1.0, static_cast<double>(out.size() - 1));
    if (points > max_points) {
      throw Error(ErrorCode::ExplosionGuard, "grid search would exceed " + std::to_string(max_points) + " points");
    }
  }

  ObjectiveEvaluator evaluate(net, objective, tol.flow);
  Checker checker(net, topo, tol);
  const double sign = objective.sense == Sense::Minimize ? 1.0 : -1.0;

  BruteForceResult result;
  std::vector<double> x(net.edges.size(), 0.0);
  std::vector<double> best_x;
  double best = kInf;

  std::function<void(std::size_t)> visit_component;
  // Distributes `remaining` over out-edges starting at position `k`.
  std::function<void(std::size_t, std::size_t, double)> split = [&](std::size_t pos, std::size_t k, double remaining) {
    const auto j = order[pos];
    const auto& out = topo.out_edges(j);
    const auto e = out[k];
    const double cap = net.edges[e].capacity.value_or(kInf);
    if (k + 1 == out.size()) {
      if (std::fabs(remaining) < 1e-9) remaining = 0.0;
      if (remaining > cap + tol.flow) return;
      x[e] = remaining;
      visit_component(pos + 1);
      return;
    }
    const auto steps = static_cast<long long>(std::floor(std::min(remaining, cap) / grid_step + 1e-9));
    for (long long g = 0; g <= steps; ++g) {
      const double v = static_cast<double>(g) * grid_step;
      x[e] = v;
      split(pos, k + 1, remaining - v);
    }
  };

  visit_component = [&](std::size_t pos) {
    if (pos == order.size()) {
      ++result.points;
      if (!checker.check(x, nullptr)) return;
      const double value = sign * evaluate(x);
      if (value < best - 1e-12) {
        best = value;
        best_x = x;
      }
      return;
    }
    const auto j = order[pos];
    const auto& a = net.components[j].attrs;
    const auto& in = topo.in_edges(j);
    const auto& out = topo.out_edges(j);
    if (out.empty()) {
      visit_component(pos + 1);
      return;
    }
    if (in.empty()) {
      if (a.supply) {
        split(pos, 0, *a.supply);
        return;
      }
      const auto steps = static_cast<long long>(std::floor(out_bound[j] / grid_step + 1e-9));
      for (long long g = 0; g <= steps; ++g) split(pos, 0, static_cast<double>(g) * grid_step);
      return;
    }
    double inflow = 0.0;
    for (auto e : in) inflow += x[e];
    if (a.capacity && inflow > *a.capacity + tol.flow) return;
    double total;
    if (a.fixed_outflow) {
      total = inflow > tol.flow ? *a.fixed_outflow : 0.0;
    } else {
      total = a.reduction_rate.value_or(1.0) * inflow;
    }
    split(pos, 0, total);
  };

  visit_component(0);
  if (!best_x.empty()) {
    result.found = true;
    result.objective_value = sign * best;
    for (std::size_t e = 0; e < net.edges.size(); ++e) result.flows[net.edges[e].id()] = best_x[e];
  }
  return result;
}

Json report_to_json(const FeasibilityReport& report) {
  Json out = Json::object();
  out["feasible"] = report.feasible;
  if (report.objective_value) out["objective_value"] = *report.objective_value;
  Json list = Json::array();
  for (const auto& v : report.violations) {
    list.push_back(Json{{"tag", v.tag}, {"element", v.element}, {"lhs", v.lhs}, {"rhs", v.rhs}, {"slack", v.slack}});
  }
  out["violations"] = std::move(list);
  return out;
}

}  // namespace wnopt
