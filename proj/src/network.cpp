#include "wnopt/network.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

#include "wnopt/error.hpp"

namespace wnopt {

std::string_view to_string(ComponentTag tag) {
  switch (tag) {
    case ComponentTag::FreshWaterSource: return "FreshWaterSource";
    case ComponentTag::WastewaterSource: return "WastewaterSource";
    case ComponentTag::Treatment: return "Treatment";
    case ComponentTag::Tank: return "Tank";
    case ComponentTag::Application: return "Application";
    case ComponentTag::Discharge: return "Discharge";
    case ComponentTag::Dummy: return "Dummy";
  }
  return "Treatment";
}

std::optional<ComponentTag> parse_component_tag(std::string_view text) {
  for (auto tag : {ComponentTag::FreshWaterSource, ComponentTag::WastewaterSource, ComponentTag::Treatment,
                   ComponentTag::Tank, ComponentTag::Application, ComponentTag::Discharge, ComponentTag::Dummy}) {
    if (to_string(tag) == text) return tag;
  }
  return std::nullopt;
}

std::string_view to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::TotalFlow: return "TotalFlow";
    case ObjectiveKind::Cost: return "Cost";
    case ObjectiveKind::Energy: return "Energy";
  }
  return "TotalFlow";
}

std::string_view to_string(Sense sense) { return sense == Sense::Minimize ? "Minimize" : "Maximize"; }

std::optional<ObjectiveKind> parse_objective_kind(std::string_view text) {
  for (auto kind : {ObjectiveKind::TotalFlow, ObjectiveKind::Cost, ObjectiveKind::Energy}) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

std::optional<Sense> parse_sense(std::string_view text) {
  if (text == "Minimize") return Sense::Minimize;
  if (text == "Maximize") return Sense::Maximize;
  return std::nullopt;
}

std::string_view to_string(Role role) {
  switch (role) {
    case Role::Provider: return "Provider";
    case Role::Intermediate: return "Intermediate";
    case Role::Receiver: return "Receiver";
    case Role::Unclassified: return "Unclassified";
  }
  return "Unclassified";
}

std::string Edge::edge_id(std::string_view from, std::string_view to) {
  std::string id;
  id.reserve(from.size() + to.size() + 2);
  id.append(from).append("->").append(to);
  return id;
}

const Component* Network::find_component(std::string_view id) const {
  auto it = std::find_if(components.begin(), components.end(), [&](const Component& c) { return c.id == id; });
  return it == components.end() ? nullptr : &*it;
}

Component* Network::find_component(std::string_view id) {
  return const_cast<Component*>(std::as_const(*this).find_component(id));
}

const Edge* Network::find_edge(std::string_view edge_id) const {
  auto it = std::find_if(edges.begin(), edges.end(), [&](const Edge& e) { return e.id() == edge_id; });
  return it == edges.end() ? nullptr : &*it;
}

Edge* Network::find_edge(std::string_view edge_id) { return const_cast<Edge*>(std::as_const(*this).find_edge(edge_id)); }

Topology::Topology(const Network& net) : net_(&net) {
  const auto n = net.components.size();
  for (std::size_t i = 0; i < n; ++i) component_pos_.emplace(net.components[i].id, i);
  in_.assign(n, {});
  out_.assign(n, {});
  from_.assign(net.edges.size(), 0);
  to_.assign(net.edges.size(), 0);
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    edge_pos_.emplace(net.edges[e].id(), e);
    auto f = component_pos_.find(net.edges[e].from);
    auto t = component_pos_.find(net.edges[e].to);
    if (f == component_pos_.end() || t == component_pos_.end()) {
      resolved_ = false;
      continue;
    }
    from_[e] = f->second;
    to_[e] = t->second;
    out_[f->second].push_back(e);
    in_[t->second].push_back(e);
  }
  if (!resolved_) return;

  // Kahn with a min-heap on position so the order is deterministic.
  std::vector<std::size_t> indegree(n, 0);
  for (std::size_t i = 0; i < n; ++i) indegree[i] = in_[i].size();
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.push(i);
  }
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    auto i = ready.top();
    ready.pop();
    order.push_back(i);
    for (auto e : out_[i]) {
      if (--indegree[to_[e]] == 0) ready.push(to_[e]);
    }
  }
  if (order.size() == n) order_ = std::move(order);
}

std::optional<std::size_t> Topology::component_index(std::string_view id) const {
  auto it = component_pos_.find(id);
  if (it == component_pos_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Topology::edge_index(std::string_view edge_id) const {
  auto it = edge_pos_.find(edge_id);
  if (it == edge_pos_.end()) return std::nullopt;
  return it->second;
}

void Topology::require_resolved() const {
  if (!resolved_) throw Error(ErrorCode::Corrupt, "edge references a missing component");
}

bool ValidationReport::has(std::string_view code) const {
  return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.code == code; });
}

namespace {

bool is_source_tag(ComponentTag tag) {
  return tag == ComponentTag::FreshWaterSource || tag == ComponentTag::WastewaterSource;
}

bool is_sink_tag(ComponentTag tag) { return tag == ComponentTag::Application || tag == ComponentTag::Discharge; }

class Reporter {
 public:
  void error(std::string code, std::string element, std::string message) {
    report_.violations.push_back({std::move(code), std::move(element), std::move(message), Severity::Error});
  }
  void warn(std::string code, std::string element, std::string message) {
    report_.warnings.push_back({std::move(code), std::move(element), std::move(message), Severity::Warning});
  }
  void non_negative(const std::optional<double>& value, const std::string& element, std::string_view name) {
    if (!value) return;
    if (!std::isfinite(*value)) {
      error("non_finite_value", element, std::string(name) + " is not finite");
    } else if (*value < 0.0) {
      error("negative_value", element, std::string(name) + " is negative");
    }
  }
  ValidationReport take() { return std::move(report_); }

 private:
  ValidationReport report_;
};

}  // namespace

ValidationReport validate(const Network& net) {
  Reporter out;

  std::set<std::string> pollutant_ids;
  for (const auto& p : net.pollutants) {
    if (p.id.empty()) out.error("empty_id", "", "pollutant with empty id");
    if (!pollutant_ids.insert(p.id).second) out.error("duplicate_pollutant", p.id, "pollutant id is not unique");
  }

  std::set<std::string> component_ids;
  for (const auto& c : net.components) {
    if (c.id.empty()) out.error("empty_id", "", "component with empty id");
    if (!component_ids.insert(c.id).second) out.error("duplicate_component", c.id, "component id is not unique");
    const auto& a = c.attrs;
    if (a.reduction_rate && a.fixed_outflow) out.error("sr_sf_conflict", c.id, "SR/SF conflict");
    out.non_negative(a.capacity, c.id, "capacity");
    out.non_negative(a.supply, c.id, "supply");
    out.non_negative(a.demand, c.id, "demand");
    out.non_negative(a.reduction_rate, c.id, "reduction_rate");
    out.non_negative(a.fixed_outflow, c.id, "fixed_outflow");
    out.non_negative(a.fixed_cost, c.id, "fixed_cost");
    out.non_negative(a.variable_cost, c.id, "variable_cost");
    out.non_negative(a.fixed_energy, c.id, "fixed_energy");
    out.non_negative(a.variable_energy, c.id, "variable_energy");
    for (const auto& [pid, q] : a.quality) {
      const std::string element = c.id + "/" + pid;
      if (!pollutant_ids.count(pid)) out.error("unknown_pollutant", element, "quality entry for undeclared pollutant");
      if (q.reduction_rate && q.fixed_exit) out.error("rr_rf_conflict", element, "RR/RF conflict");
      out.non_negative(q.given, element, "given");
      out.non_negative(q.reduction_rate, element, "reduction_rate");
      out.non_negative(q.fixed_exit, element, "fixed_exit");
      out.non_negative(q.lower, element, "lower");
      out.non_negative(q.upper, element, "upper");
      if (q.lower && q.upper && *q.lower > *q.upper) out.error("bounds_order", element, "lower limit exceeds upper");
    }
  }

  std::set<std::string> edge_ids;
  for (const auto& e : net.edges) {
    const auto id = e.id();
    if (e.from == e.to) out.error("self_loop", id, "edge connects a component to itself");
    if (!edge_ids.insert(id).second) out.error("duplicate_edge", id, "(from,to) pair is not unique");
    if (!component_ids.count(e.from)) out.error("dangling_endpoint", id, "dangling endpoint: " + e.from);
    if (!component_ids.count(e.to)) out.error("dangling_endpoint", id, "dangling endpoint: " + e.to);
    out.non_negative(e.capacity, id, "capacity");
    if (e.option_group && e.option_group->empty()) out.error("empty_id", id, "empty option group name");
  }

  Topology topo(net);
  bool resolved = true;
  for (const auto& e : net.edges) {
    if (!component_ids.count(e.from) || !component_ids.count(e.to)) resolved = false;
  }
  if (resolved && component_ids.size() == net.components.size()) {
    for (std::size_t i = 0; i < net.components.size(); ++i) {
      const auto& c = net.components[i];
      if (is_source_tag(c.tag) && !topo.in_edges(i).empty()) {
        out.error("source_has_inflow", c.id, "source component has incoming edges");
      }
      if (is_sink_tag(c.tag) && !topo.out_edges(i).empty()) {
        out.error("sink_has_outflow", c.id, "receiver component has outgoing edges");
      }
      if (topo.in_edges(i).empty() && topo.out_edges(i).empty()) {
        out.warn("isolated", c.id, "component has no incident edges");
      }
      if (topo.in_edges(i).empty() && !topo.out_edges(i).empty()) {
        for (const auto& p : net.pollutants) {
          auto q = c.attrs.quality.find(p.id);
          if (q == c.attrs.quality.end() || !q->second.given) {
            out.warn("missing_quality", c.id + "/" + p.id, "provider has no given quality for pollutant");
          }
        }
      }
    }
    if (!topo.topological_order()) out.error("cycle", "", "network contains a directed cycle");
  }

  if (net.objective) {
    const auto& obj = *net.objective;
    if (obj.kind != ObjectiveKind::TotalFlow && obj.sense != Sense::Minimize) {
      out.error("objective_sense", "objective", "cost and energy objectives must be minimized");
    }
    if (obj.scope.empty()) out.error("objective_scope", "objective", "objective scope is empty");
    for (const auto& id : obj.scope) {
      if (!component_ids.count(id) && !edge_ids.count(id)) {
        out.error("objective_scope", id, "objective scope references a missing element");
      }
    }
  }
  return out.take();
}

Classification classify(const Network& net) {
  Topology topo(net);
  Classification result;
  for (std::size_t i = 0; i < net.components.size(); ++i) {
    auto role = role_of(topo, i);
    if (role == Role::Unclassified) result.isolated.push_back(net.components[i].id);
    result.roles[net.components[i].id] = role;
  }
  return result;
}

Role role_of(const Topology& topo, std::size_t component) {
  const bool has_in = !topo.in_edges(component).empty();
  const bool has_out = !topo.out_edges(component).empty();
  if (!has_in && !has_out) return Role::Unclassified;
  if (!has_in) return Role::Provider;
  if (!has_out) return Role::Receiver;
  return Role::Intermediate;
}

namespace {

template <typename Net>
auto slot_impl(Net& net, std::string_view element, std::string_view path) -> decltype(&net.edges[0].capacity) {
  if (auto* edge = net.find_edge(element)) {
    return path == "capacity" ? &edge->capacity : nullptr;
  }
  auto* comp = net.find_component(element);
  if (!comp) return nullptr;
  auto& a = comp->attrs;
  if (path == "capacity") return &a.capacity;
  if (path == "supply") return &a.supply;
  if (path == "demand") return &a.demand;
  if (path == "reduction_rate") return &a.reduction_rate;
  if (path == "fixed_outflow") return &a.fixed_outflow;
  if (path == "fixed_cost") return &a.fixed_cost;
  if (path == "variable_cost") return &a.variable_cost;
  if (path == "fixed_energy") return &a.fixed_energy;
  if (path == "variable_energy") return &a.variable_energy;
  constexpr std::string_view prefix = "quality.";
  if (path.substr(0, prefix.size()) != prefix) return nullptr;
  auto rest = path.substr(prefix.size());
  auto dot = rest.rfind('.');
  if (dot == std::string_view::npos) return nullptr;
  const std::string pollutant(rest.substr(0, dot));
  const auto field = rest.substr(dot + 1);
  if (std::none_of(net.pollutants.begin(), net.pollutants.end(), [&](const Pollutant& p) { return p.id == pollutant; })) {
    return nullptr;
  }
  decltype(&a.quality.begin()->second) q = nullptr;
  if constexpr (std::is_const_v<Net>) {
    auto it = a.quality.find(pollutant);
    if (it == a.quality.end()) {
      static const QualityAttrs empty{};
      q = &empty;
    } else {
      q = &it->second;
    }
  } else {
    q = &a.quality[pollutant];
  }
  if (field == "given") return &q->given;
  if (field == "reduction_rate") return &q->reduction_rate;
  if (field == "fixed_exit") return &q->fixed_exit;
  if (field == "lower") return &q->lower;
  if (field == "upper") return &q->upper;
  return nullptr;
}

}  // namespace

std::optional<double>* attribute_slot(Network& net, std::string_view element, std::string_view path) {
  return slot_impl(net, element, path);
}

const std::optional<double>* attribute_slot(const Network& net, std::string_view element, std::string_view path) {
  return slot_impl(net, element, path);
}

}  // namespace wnopt
