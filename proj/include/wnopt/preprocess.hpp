#pragma once

#include <map>
#include <string>

#include "wnopt/network.hpp"

namespace wnopt {

struct Solution;

// A network in which every component has at most two inflows. Components
// with n > 2 inflows are fed through n - 2 lossless Dummy components.
struct CanonicalNetwork {
  Network network;
  // Inserted element id -> original element id. Rerouted inflow edges map to
  // the edge they replace; dummy components and their outlet edges map to the
  // blending component they feed.
  std::map<std::string, std::string> origin_map;

  bool is_inserted_component(const std::string& id) const;
};

// Left fold over inflows in input order: D1 takes {e1, e2}, D2 takes {D1, e3},
// ..., the original component keeps {D_{n-2}, e_n}. Throws Error(Cyclic).
CanonicalNetwork canonicalize(const Network& net);

// Maps a solution computed on `canon` back onto `original`. Rerouted edges
// carry their flow back; dummy outlet edges and dummy concentrations drop.
// Throws Error(Corrupt) for elements that resolve to nothing.
Solution uncanonicalize(const CanonicalNetwork& canon, const Network& original, const Solution& solution);

// Inflow edges of `component` in `canon`, looking through dummies, i.e. the
// images of the original inflow edges.
std::vector<std::size_t> original_inflows(const CanonicalNetwork& canon, const Topology& topo, std::size_t component);

}  // namespace wnopt
