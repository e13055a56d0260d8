#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wnopt {

enum class ComponentTag {
  FreshWaterSource,
  WastewaterSource,
  Treatment,
  Tank,
  Application,
  Discharge,
  Dummy,
};

std::string_view to_string(ComponentTag tag);
std::optional<ComponentTag> parse_component_tag(std::string_view text);

struct Pollutant {
  std::string id;
  std::string name;
  std::string unit;

  friend bool operator==(const Pollutant&, const Pollutant&) = default;
};

// Per-pollutant attributes of a component. `reduction_rate` (RR) and
// `fixed_exit` (RF) are mutually exclusive; validate() reports both present.
struct QualityAttrs {
  std::optional<double> given;           // quality of the stream a provider inserts
  std::optional<double> reduction_rate;  // exit = rate * flow-weighted inlet mean
  std::optional<double> fixed_exit;      // exit concentration whenever active
  std::optional<double> lower;
  std::optional<double> upper;

  friend bool operator==(const QualityAttrs&, const QualityAttrs&) = default;
};

// Every attribute is optional; constraint families are only emitted for the
// attributes that are present. Flows are m3/h.
struct ComponentAttrs {
  std::optional<double> capacity;
  std::optional<double> supply;          // fixed flow a provider must insert
  std::optional<double> demand;          // minimum flow a receiver must get
  std::optional<double> reduction_rate;  // SR: outflow = SR * inflow
  std::optional<double> fixed_outflow;   // SF: outflow = SF whenever active
  std::map<std::string, QualityAttrs> quality;  // keyed by pollutant id
  std::optional<double> fixed_cost;
  std::optional<double> variable_cost;
  std::optional<double> fixed_energy;
  std::optional<double> variable_energy;

  friend bool operator==(const ComponentAttrs&, const ComponentAttrs&) = default;
};

struct Component {
  std::string id;
  ComponentTag tag = ComponentTag::Treatment;
  ComponentAttrs attrs;

  friend bool operator==(const Component&, const Component&) = default;
};

struct Edge {
  std::string from;
  std::string to;
  std::optional<double> capacity;
  std::optional<std::string> option_group;

  std::string id() const { return edge_id(from, to); }
  static std::string edge_id(std::string_view from, std::string_view to);

  friend bool operator==(const Edge&, const Edge&) = default;
};

enum class ObjectiveKind { TotalFlow, Cost, Energy };
enum class Sense { Minimize, Maximize };

std::string_view to_string(ObjectiveKind kind);
std::string_view to_string(Sense sense);
std::optional<ObjectiveKind> parse_objective_kind(std::string_view text);
std::optional<Sense> parse_sense(std::string_view text);

// `scope` holds edge ids ("from->to") and/or component ids. A component in a
// TotalFlow scope stands for its inbound edges (outbound for providers).
struct Objective {
  ObjectiveKind kind = ObjectiveKind::TotalFlow;
  Sense sense = Sense::Minimize;
  std::vector<std::string> scope;

  friend bool operator==(const Objective&, const Objective&) = default;
};

struct Network {
  std::vector<Pollutant> pollutants;
  std::vector<Component> components;
  std::vector<Edge> edges;
  std::optional<Objective> objective;

  const Component* find_component(std::string_view id) const;
  Component* find_component(std::string_view id);
  const Edge* find_edge(std::string_view edge_id) const;
  Edge* find_edge(std::string_view edge_id);

  friend bool operator==(const Network&, const Network&) = default;
};

// Index view over a network: component positions and edge incidence. Holds a
// reference, so the network must outlive it.
class Topology {
 public:
  explicit Topology(const Network& net);

  const Network& network() const { return *net_; }
  std::size_t component_count() const { return net_->components.size(); }
  std::optional<std::size_t> component_index(std::string_view id) const;
  std::optional<std::size_t> edge_index(std::string_view edge_id) const;
  std::size_t from_index(std::size_t edge) const { return from_[edge]; }
  std::size_t to_index(std::size_t edge) const { return to_[edge]; }

  // Edge indices, in input order.
  const std::vector<std::size_t>& in_edges(std::size_t component) const { return in_[component]; }
  const std::vector<std::size_t>& out_edges(std::size_t component) const { return out_[component]; }

  // Kahn order (ties by input position); nullopt when the graph has a cycle.
  const std::optional<std::vector<std::size_t>>& topological_order() const { return order_; }

  // Requires every edge endpoint to resolve; throws Error(Corrupt) otherwise.
  void require_resolved() const;

 private:
  const Network* net_;
  std::map<std::string, std::size_t, std::less<>> component_pos_;
  std::map<std::string, std::size_t, std::less<>> edge_pos_;
  std::vector<std::size_t> from_, to_;
  std::vector<std::vector<std::size_t>> in_, out_;
  std::optional<std::vector<std::size_t>> order_;
  bool resolved_ = true;
};

enum class Severity { Error, Warning };

struct Violation {
  std::string code;
  std::string element;
  std::string message;
  Severity severity = Severity::Error;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  std::vector<Violation> violations;  // errors only
  std::vector<Violation> warnings;

  bool ok() const { return violations.empty(); }
  bool has(std::string_view code) const;

  friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

// Reports every structural and attribute problem; never throws.
ValidationReport validate(const Network& net);

enum class Role { Provider, Intermediate, Receiver, Unclassified };
std::string_view to_string(Role role);

struct Classification {
  std::map<std::string, Role> roles;
  std::vector<std::string> isolated;  // components with no incident edge
};

Classification classify(const Network& net);

// Role of a component by incidence; Unclassified when isolated.
Role role_of(const Topology& topo, std::size_t component);

// Named numeric attribute of a component or edge, addressed by `path`:
//   capacity supply demand reduction_rate fixed_outflow fixed_cost
//   variable_cost fixed_energy variable_energy quality.<pollutant>.<field>
// with <field> one of given reduction_rate fixed_exit lower upper. Edges only
// expose "capacity". Returns nullptr for an unknown element or path.
std::optional<double>* attribute_slot(Network& net, std::string_view element, std::string_view path);
const std::optional<double>* attribute_slot(const Network& net, std::string_view element, std::string_view path);

}  // namespace wnopt
