#include "wnopt/preprocess.hpp"

#include <algorithm>
#include <set>

#include "wnopt/error.hpp"
#include "wnopt/solution.hpp"

namespace wnopt {

bool CanonicalNetwork::is_inserted_component(const std::string& id) const {
  auto it = origin_map.find(id);
  return it != origin_map.end() && network.find_component(id) != nullptr;
}

namespace {

std::optional<double> merged_capacity(const std::optional<double>& a, const std::optional<double>& b) {
  if (a && b) return *a + *b;
  return std::nullopt;
}

}  // namespace

CanonicalNetwork canonicalize(const Network& net) {
  Topology topo(net);
  topo.require_resolved();
  if (!topo.topological_order()) throw Error(ErrorCode::Cyclic, "cannot canonicalize a cyclic network");

  CanonicalNetwork out;
  out.network.pollutants = net.pollutants;
  out.network.components = net.components;
  out.network.objective = net.objective;
  out.network.edges = net.edges;

  std::set<std::string> taken;
  for (const auto& c : net.components) taken.insert(c.id);

  std::vector<Edge> appended;
  for (std::size_t j = 0; j < net.components.size(); ++j) {
    const auto& inflows = topo.in_edges(j);
    if (inflows.size() <= 2) continue;
    const auto& target = net.components[j].id;
    const std::size_t dummies = inflows.size() - 2;

    std::vector<std::string> ids;
    for (std::size_t m = 1; m <= dummies; ++m) {
      std::string id = target + "~d" + std::to_string(m);
      while (taken.count(id)) id += "~";
      taken.insert(id);
      ids.push_back(id);

      Component dummy;
      dummy.id = id;
      dummy.tag = ComponentTag::Dummy;
      dummy.attrs.reduction_rate = 1.0;
      for (const auto& p : net.pollutants) dummy.attrs.quality[p.id].reduction_rate = 1.0;
      out.network.components.push_back(std::move(dummy));
      out.origin_map[id] = target;
    }

    // Reroute e1, e2 into D1 and e_{m+1} into D_m; the last inflow stays.
    auto reroute = [&](std::size_t edge, const std::string& new_to) {
      auto& e = out.network.edges[edge];
      const auto old_id = e.id();
      e.to = new_to;
      out.origin_map[e.id()] = old_id;
    };
    reroute(inflows[0], ids[0]);
    reroute(inflows[1], ids[0]);
    std::optional<double> carried = merged_capacity(net.edges[inflows[0]].capacity, net.edges[inflows[1]].capacity);
    for (std::size_t m = 1; m < dummies; ++m) {
      Edge link{ids[m - 1], ids[m], carried, std::nullopt};
      out.origin_map[link.id()] = target;
      appended.push_back(std::move(link));
      reroute(inflows[m + 1], ids[m]);
      carried = merged_capacity(carried, net.edges[inflows[m + 1]].capacity);
    }
    Edge outlet{ids.back(), target, carried, std::nullopt};
    out.origin_map[outlet.id()] = target;
    appended.push_back(std::move(outlet));
  }
  for (auto& e : appended) out.network.edges.push_back(std::move(e));
  return out;
}

std::vector<std::size_t> original_inflows(const CanonicalNetwork& canon, const Topology& topo, std::size_t component) {
  std::vector<std::size_t> result;
  std::vector<std::size_t> stack{component};
  while (!stack.empty()) {
    auto node = stack.back();
    stack.pop_back();
    for (auto e : topo.in_edges(node)) {
      auto src = topo.from_index(e);
      const auto& src_id = canon.network.components[src].id;
      if (canon.is_inserted_component(src_id)) {
        stack.push_back(src);
      } else {
        result.push_back(e);
      }
    }
  }
  std::sort(result.begin(), result.end());
  return result;
}

Solution uncanonicalize(const CanonicalNetwork& canon, const Network& original, const Solution& solution) {
  std::set<std::string> original_edges;
  for (const auto& e : original.edges) original_edges.insert(e.id());

  // Resolves a canonical edge id to an original edge id, or "" for dummy links.
  auto map_edge = [&](const std::string& id) -> std::string {
    if (auto it = canon.origin_map.find(id); it != canon.origin_map.end()) {
      if (original_edges.count(it->second)) return it->second;
      if (original.find_component(it->second)) return {};
      throw Error(ErrorCode::Corrupt, "origin of '" + id + "' is not an original element");
    }
    if (original_edges.count(id) && canon.network.find_edge(id)) return id;
    throw Error(ErrorCode::Corrupt, "solution references unknown edge '" + id + "'");
  };
  auto keep_component = [&](const std::string& id) {
    if (canon.is_inserted_component(id)) return false;
    if (original.find_component(id)) return true;
    throw Error(ErrorCode::Corrupt, "solution references unknown component '" + id + "'");
  };

  Solution out = solution;
  out.flows.clear();
  out.edge_use.clear();
  out.concentrations.clear();
  out.blend_parts.clear();
  for (const auto& [id, value] : solution.flows) {
    if (auto orig = map_edge(id); !orig.empty()) out.flows[orig] = value;
  }
  for (const auto& [id, value] : solution.edge_use) {
    if (auto orig = map_edge(id); !orig.empty()) out.edge_use[orig] = value;
  }
  for (const auto& [id, values] : solution.concentrations) {
    if (keep_component(id)) out.concentrations[id] = values;
  }
  for (const auto& [id, k] : solution.blend_parts) {
    if (keep_component(id)) out.blend_parts[id] = k;
  }
  return out;
}

}  // namespace wnopt
