#include "wnopt/milp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "wnopt/error.hpp"

namespace wnopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const QualityAttrs* quality_of(const Component& c, const std::string& pollutant) {
  auto it = c.attrs.quality.find(pollutant);
  return it == c.attrs.quality.end() ? nullptr : &it->second;
}

// Resolves an original edge id to the canonical edge carrying its flow.
std::optional<std::size_t> canonical_edge(const CanonicalNetwork& net, const Topology& topo, const std::string& id) {
  if (auto direct = topo.edge_index(id)) {
    if (!net.origin_map.count(id)) return direct;
  }
  for (const auto& [inserted, origin] : net.origin_map) {
    if (origin == id) {
      if (auto e = topo.edge_index(inserted)) return e;
    }
  }
  return std::nullopt;
}

class RowBuilder {
 public:
  explicit RowBuilder(std::vector<Row>& out) : out_(out) {}

  Row& add(std::string tag, std::string element, RowSense sense, double rhs, bool big_m = false) {
    Row r;
    r.tag = std::move(tag);
    r.element = std::move(element);
    r.sense = sense;
    r.rhs = rhs;
    r.big_m = big_m;
    out_.push_back(std::move(r));
    return out_.back();
  }

 private:
  std::vector<Row>& out_;
};

void push_sum(Row& row, const std::vector<std::size_t>& edges, const std::vector<std::size_t>& columns, double coef) {
  for (auto e : edges) row.terms.push_back({columns[e], coef});
}

int tag_rank(const std::string& tag) {
  static const std::vector<std::string> order = {
      "nl1",  "nl2",  "nl3",  "nl4",  "nl5",  "nl6",  "nl7",  "nl8",  "nl9",  "nl10", "nl11", "nl13", "nl14",
      "nl15", "nl16", "l1",   "l2",   "l3",   "l4",   "l5",   "l6",   "l7",   "l8",   "l9",   "l10",  "l11",
      "l12",  "l13",  "l14",  "l15",  "l16",  "l17",  "l18",  "l19",  "l20",  "l21",  "conflict"};
  auto it = std::find(order.begin(), order.end(), tag);
  return it == order.end() ? static_cast<int>(order.size()) : static_cast<int>(it - order.begin());
}

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

std::size_t MilpModel::add_variable(std::string name, VarType type, double lower, double upper) {
  variables.push_back({std::move(name), type, lower, upper});
  return variables.size() - 1;
}

BigMPolicy derive_big_m(const CanonicalNetwork& canon) {
  const auto& net = canon.network;
  Topology topo(net);
  topo.require_resolved();
  const auto& order = topo.topological_order();
  if (!order) throw Error(ErrorCode::Cyclic, "cannot derive bounds on a cyclic network");

  const auto n = net.components.size();
  std::vector<double> in_bound(n, 0.0), out_bound(n, 0.0), edge_bound(net.edges.size(), kInf);
  double flow_m = 0.0;
  for (auto j : *order) {
    const auto& a = net.components[j].attrs;
    double inflow = 0.0;
    for (auto e : topo.in_edges(j)) inflow += edge_bound[e];
    if (a.capacity) inflow = std::min(inflow, *a.capacity);
    in_bound[j] = topo.in_edges(j).empty() ? 0.0 : inflow;

    double outflow = 0.0;
    if (topo.in_edges(j).empty()) {
      if (a.supply) {
        outflow = *a.supply;
      } else if (a.capacity) {
        outflow = *a.capacity;
      } else {
        outflow = 0.0;
        for (auto e : topo.out_edges(j)) outflow += net.edges[e].capacity.value_or(kInf);
      }
    } else if (a.fixed_outflow) {
      outflow = *a.fixed_outflow;
    } else {
      outflow = a.reduction_rate.value_or(1.0) * inflow;
    }
    if (a.capacity) outflow = std::min(outflow, *a.capacity);
    out_bound[j] = topo.out_edges(j).empty() ? 0.0 : outflow;

    for (auto e : topo.out_edges(j)) {
      edge_bound[e] = std::min(net.edges[e].capacity.value_or(kInf), out_bound[j]);
      if (!std::isfinite(edge_bound[e])) {
        throw Error(ErrorCode::UnboundedBigM,
                    "flow on '" + net.edges[e].id() + "' has no finite bound; supply capacities or a big-M value");
      }
      flow_m = std::max(flow_m, edge_bound[e]);
    }
    flow_m = std::max({flow_m, in_bound[j], out_bound[j]});
  }

  BigMPolicy policy;
  policy.flow_m = flow_m > 0.0 ? flow_m : 1.0;

  for (const auto& p : net.pollutants) {
    double max_rate = 1.0;
    double bound = 0.0;
    std::vector<double> exit_bound(n, 0.0);
    for (auto j : *order) {
      const auto* q = quality_of(net.components[j], p.id);
      const double rate = q && q->reduction_rate ? *q->reduction_rate : 1.0;
      max_rate = std::max(max_rate, rate);
      if (q) {
        for (const auto& v : {q->given, q->fixed_exit, q->upper, q->lower}) {
          if (v) bound = std::max(bound, *v);
        }
        if (q->upper) bound = std::max(bound, *q->upper * rate);
      }
      if (topo.in_edges(j).empty()) {
        exit_bound[j] = q && q->given ? *q->given : 0.0;
      } else if (q && q->fixed_exit) {
        exit_bound[j] = *q->fixed_exit;
      } else {
        double upstream = 0.0;
        for (auto e : topo.in_edges(j)) upstream = std::max(upstream, exit_bound[topo.from_index(e)]);
        exit_bound[j] = rate * upstream;
      }
      bound = std::max(bound, exit_bound[j]);
    }
    policy.quality_m[p.id] = std::max(2.0 * max_rate * bound, 1.0);
  }
  return policy;
}

std::vector<OptionGroup> options_from_edges(const Network& net) {
  std::vector<OptionGroup> groups;
  for (const auto& e : net.edges) {
    if (!e.option_group) continue;
    // "decision:name" places the option under a named decision.
    const auto& label = *e.option_group;
    const auto colon = label.find(':');
    const std::string name = colon == std::string::npos ? label : label.substr(colon + 1);
    const std::string decision = colon == std::string::npos ? "default" : label.substr(0, colon);
    auto it = std::find_if(groups.begin(), groups.end(), [&](const OptionGroup& g) { return g.name == name; });
    if (it == groups.end()) {
      groups.push_back({name, decision, {}});
      it = std::prev(groups.end());
    }
    it->edges.push_back(e.id());
  }
  return groups;
}

MilpModel declare_variables(const CanonicalNetwork& canon, const BuildOptions& opts, const BigMPolicy& policy) {
  if (opts.discretization < 1) throw Error(ErrorCode::InvalidArgument, "discretization K must be at least 1");
  const auto& net = canon.network;
  Topology topo(net);
  topo.require_resolved();

  MilpModel model;
  model.discretization = opts.discretization;
  model.policy = policy;
  if (opts.mu) model.policy.mu = *opts.mu;
  if (!(model.policy.mu > 0.0)) throw Error(ErrorCode::InvalidArgument, "mu must be positive");
  model.families = opts.families;
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    model.edge_ids.push_back(net.edges[e].id());
    model.edge_ends.emplace_back(topo.from_index(e), topo.to_index(e));
  }
  for (const auto& c : net.components) model.component_ids.push_back(c.id);
  for (const auto& p : net.pollutants) model.pollutant_ids.push_back(p.id);

  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    const double upper = net.edges[e].capacity.value_or(kInf);
    model.flow.push_back(model.add_variable("x" + std::to_string(e), VarType::Continuous, 0.0, upper));
  }
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    model.used.push_back(model.add_variable("Y" + std::to_string(e), VarType::Binary, 0.0, 1.0));
  }
  model.concentration.assign(net.components.size(), {});
  for (std::size_t j = 0; j < net.components.size(); ++j) {
    for (std::size_t p = 0; p < net.pollutants.size(); ++p) {
      // Half the quality M bounds every concentration an active component can reach.
      const auto m = model.policy.quality_m.find(net.pollutants[p].id);
      const double upper = m == model.policy.quality_m.end() ? kInf : m->second / 2.0;
      model.concentration[j].push_back(model.add_variable(
          "c" + std::to_string(j) + "_" + std::to_string(p), VarType::Continuous, 0.0, upper));
    }
  }
  const int K = opts.discretization;
  for (std::size_t j = 0; j < net.components.size(); ++j) {
    const auto& in = topo.in_edges(j);
    if (in.size() != 2) continue;
    BlendPoint b;
    b.component = j;
    const auto& src0 = net.edges[in[0]].from;
    const auto& src1 = net.edges[in[1]].from;
    b.first_edge = src1 < src0 ? in[1] : in[0];
    b.second_edge = b.first_edge == in[0] ? in[1] : in[0];
    for (int k = 0; k <= K; ++k) {
      b.z.push_back(model.add_variable("z" + std::to_string(j) + "_" + std::to_string(k), VarType::Binary, 0.0, 1.0));
    }
    model.blends.push_back(std::move(b));
  }

  // Membership checks apply in both modes; w columns only exist when options exclude each other.
  std::map<std::string, std::set<std::string>> decision_edges;
  std::set<std::string> names;
  for (const auto& g : opts.options) {
    if (!names.insert(g.name).second) {
      throw Error(ErrorCode::InvalidArgument, "option group name '" + g.name + "' is not unique");
    }
    for (const auto& id : g.edges) {
      if (!canonical_edge(canon, topo, id)) {
        throw Error(ErrorCode::InvalidArgument, "option '" + g.name + "' references unknown edge '" + id + "'");
      }
      if (!decision_edges[g.decision].insert(id).second) {
        throw Error(ErrorCode::OverlappingOptions,
                    "edge '" + id + "' belongs to two options of decision '" + g.decision + "'");
      }
    }
  }
  if (opts.conflict_mode == ConflictMode::ExclusiveOptions) {
    for (std::size_t o = 0; o < opts.options.size(); ++o) {
      model.option_vars.emplace_back(opts.options[o].name,
                                     model.add_variable("w" + std::to_string(o), VarType::Binary, 0.0, 1.0));
    }
  }
  return model;
}

std::vector<Row> build_flow_constraints(const MilpModel& model, const CanonicalNetwork& canon) {
  const auto& net = canon.network;
  Topology topo(net);
  std::vector<Row> rows;
  RowBuilder rb(rows);
  const double M = model.policy.flow_m;

  for (std::size_t j = 0; j < net.components.size(); ++j) {
    const auto& c = net.components[j];
    const auto& a = c.attrs;
    const auto& in = topo.in_edges(j);
    const auto& out = topo.out_edges(j);

    if (in.empty() && a.supply && *a.supply > 0.0) {
      auto& r = rb.add("nl1", c.id, RowSense::Equal, *a.supply);
      push_sum(r, out, model.flow, 1.0);
    }
    if (out.empty() && !in.empty() && a.demand && *a.demand > 0.0) {
      auto& r = rb.add("nl2", c.id, RowSense::GreaterEqual, *a.demand);
      push_sum(r, in, model.flow, 1.0);
    }
    if (a.capacity) {
      if (!in.empty()) {
        auto& r = rb.add("nl3", c.id, RowSense::LessEqual, *a.capacity);
        push_sum(r, in, model.flow, 1.0);
      }
      if (!out.empty()) {
        auto& r = rb.add("nl4", c.id, RowSense::LessEqual, *a.capacity);
        push_sum(r, out, model.flow, 1.0);
      }
    }
    if (in.empty() || out.empty()) continue;

    if (a.fixed_outflow) {
      const double sf = *a.fixed_outflow;
      for (auto e : in) {
        auto& upper = rb.add("nl8", c.id, RowSense::LessEqual, sf + M, true);
        push_sum(upper, out, model.flow, 1.0);
        upper.terms.push_back({model.used[e], M});
        auto& lower = rb.add("nl9", c.id, RowSense::GreaterEqual, sf - M, true);
        push_sum(lower, out, model.flow, 1.0);
        lower.terms.push_back({model.used[e], -M});
      }
      auto& act = rb.add("nl10", c.id, RowSense::LessEqual, 0.0);
      push_sum(act, out, model.flow, 1.0);
      push_sum(act, in, model.used, -sf);
    } else {
      const double sr = a.reduction_rate.value_or(1.0);
      auto& r = rb.add("nl7", c.id, RowSense::Equal, 0.0);
      push_sum(r, in, model.flow, sr);
      push_sum(r, out, model.flow, -1.0);
    }
  }

  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    const auto id = net.edges[e].id();
    const double bound = net.edges[e].capacity.value_or(M);
    auto& link = rb.add("nl5", id, RowSense::LessEqual, 0.0);
    link.terms = {{model.flow[e], 1.0}, {model.used[e], -bound}};
    auto& floor = rb.add("nl6", id, RowSense::GreaterEqual, 0.0);
    floor.terms = {{model.flow[e], 1.0}, {model.used[e], -model.policy.mu}};
  }
  return rows;
}

std::vector<Row> build_blending_constraints(const MilpModel& model, const CanonicalNetwork& canon) {
  const auto& net = canon.network;
  std::vector<Row> rows;
  RowBuilder rb(rows);
  const int K = model.discretization;
  const double M = K * model.policy.flow_m;

  for (const auto& b : model.blends) {
    const auto& id = net.components[b.component].id;
    const auto x1 = model.flow[b.first_edge];
    const auto x2 = model.flow[b.second_edge];

    auto& one = rb.add("l1", id, RowSense::Equal, 1.0);
    for (auto z : b.z) one.terms.push_back({z, 1.0});

    for (int k = 1; k < K; ++k) {
      const double share = static_cast<double>(K - k);
      auto& above = rb.add("l2", id, RowSense::LessEqual, M, true);
      above.terms = {{x1, share}, {x2, -static_cast<double>(k)}, {b.z[k], M}};
      auto& below = rb.add("l3", id, RowSense::LessEqual, M, true);
      below.terms = {{x2, static_cast<double>(k)}, {x1, -share}, {b.z[k], M}};
    }
    auto& none = rb.add("l4", id, RowSense::Equal, 1.0);
    none.terms = {{b.z[0], 1.0}, {model.used[b.first_edge], 1.0}};
    auto& all = rb.add("l5", id, RowSense::LessEqual, 1.0);
    all.terms = {{b.z[K], 1.0}, {model.used[b.second_edge], 1.0}};
  }
  return rows;
}

namespace {

// Entry-limit rows on the inlet quality (weighted mean of upstream exits).
void entry_limit_rows(RowBuilder& rb, const MilpModel& model, const Topology& topo, std::size_t j, std::size_t p,
                      const QualityAttrs& q, const std::string& element, const BlendPoint* blend) {
  const double M = model.policy.quality_m.at(model.pollutant_ids[p]);
  const int K = model.discretization;
  const auto& in = topo.in_edges(j);
  if (!q.lower && !q.upper) return;

  if (!blend) {
    const auto e = in.front();
    const auto ci = model.concentration[topo.from_index(e)][p];
    if (q.lower) {
      auto& r = rb.add("l14", element, RowSense::GreaterEqual, *q.lower - M, true);
      r.terms = {{ci, 1.0}, {model.used[e], -M}};
    }
    if (q.upper) {
      auto& r = rb.add("l15", element, RowSense::LessEqual, *q.upper + M, true);
      r.terms = {{ci, 1.0}, {model.used[e], M}};
    }
    return;
  }

  const auto ci = model.concentration[topo.from_index(blend->first_edge)][p];
  const auto cr = model.concentration[topo.from_index(blend->second_edge)][p];
  const auto yr = model.used[blend->second_edge];
  const double KM = K * M;
  for (int k = 1; k < K; ++k) {
    const double wi = k;
    const double wr = K - k;
    if (q.lower) {
      auto& r = rb.add("l16", element, RowSense::GreaterEqual, K * *q.lower - KM, true);
      r.terms = {{ci, wi}, {cr, wr}, {blend->z[k], -KM}};
    }
    if (q.upper) {
      auto& r = rb.add("l17", element, RowSense::LessEqual, K * *q.upper + KM, true);
      r.terms = {{ci, wi}, {cr, wr}, {blend->z[k], KM}};
    }
  }
  if (q.lower) {
    auto& only_r = rb.add("l18", element, RowSense::GreaterEqual, *q.lower - 2 * M, true);
    only_r.terms = {{cr, 1.0}, {blend->z[0], -M}, {yr, -M}};
    auto& only_i = rb.add("l19", element, RowSense::GreaterEqual, *q.lower - M, true);
    only_i.terms = {{ci, 1.0}, {blend->z[K], -M}};
  }
  if (q.upper) {
    auto& only_r = rb.add("l20", element, RowSense::LessEqual, *q.upper + 2 * M, true);
    only_r.terms = {{cr, 1.0}, {blend->z[0], M}, {yr, M}};
    auto& only_i = rb.add("l21", element, RowSense::LessEqual, *q.upper + M, true);
    only_i.terms = {{ci, 1.0}, {blend->z[K], M}};
  }
}

}  // namespace

std::vector<Row> build_quality_constraints(const MilpModel& model, const CanonicalNetwork& canon) {
  const auto& net = canon.network;
  Topology topo(net);
  std::vector<Row> rows;
  RowBuilder rb(rows);
  const int K = model.discretization;

  std::vector<const BlendPoint*> blend_at(net.components.size(), nullptr);
  for (const auto& b : model.blends) blend_at[b.component] = &b;

  for (std::size_t j = 0; j < net.components.size(); ++j) {
    const auto& comp = net.components[j];
    const auto& in = topo.in_edges(j);
    if (in.empty() && topo.out_edges(j).empty()) continue;

    for (std::size_t p = 0; p < net.pollutants.size(); ++p) {
      const auto& pid = net.pollutants[p].id;
      const auto element = comp.id + "/" + pid;
      const auto cj = model.concentration[j][p];
      const double M = model.policy.quality_m.at(pid);
      const auto* q = quality_of(comp, pid);
      static const QualityAttrs none{};
      const auto& qa = q ? *q : none;

      if (in.empty()) {
        if (!qa.given) {
          throw Error(ErrorCode::MissingQuality, "provider '" + comp.id + "' has no given quality for '" + pid + "'");
        }
        auto& r = rb.add("nl11", element, RowSense::Equal, *qa.given);
        r.terms = {{cj, 1.0}};
        continue;
      }

      const BlendPoint* blend = in.size() == 2 ? blend_at[j] : nullptr;
      if (qa.fixed_exit) {
        const double rf = *qa.fixed_exit;
        for (auto e : in) {
          auto& above = rb.add("nl15", element, RowSense::LessEqual, rf + M, true);
          above.terms = {{cj, 1.0}, {model.used[e], M}};
          auto& below = rb.add("nl16", element, RowSense::GreaterEqual, rf - M, true);
          below.terms = {{cj, 1.0}, {model.used[e], -M}};
        }
        entry_limit_rows(rb, model, topo, j, p, qa, element, blend);
        continue;
      }

      const double rate = qa.reduction_rate.value_or(1.0);
      if (!blend) {
        const auto e = in.front();
        const auto ci = model.concentration[topo.from_index(e)][p];
        auto& r6 = rb.add("l6", element, RowSense::LessEqual, M, true);
        r6.terms = {{ci, rate}, {cj, -1.0}, {model.used[e], M}};
        auto& r7 = rb.add("l7", element, RowSense::LessEqual, M, true);
        r7.terms = {{cj, 1.0}, {ci, -rate}, {model.used[e], M}};
      } else {
        const auto ci = model.concentration[topo.from_index(blend->first_edge)][p];
        const auto cr = model.concentration[topo.from_index(blend->second_edge)][p];
        const auto yr = model.used[blend->second_edge];
        const double KM = K * M;
        for (int k = 1; k < K; ++k) {
          const double wi = rate * k;
          const double wr = rate * (K - k);
          auto& r8 = rb.add("l8", element, RowSense::LessEqual, KM, true);
          r8.terms = {{ci, wi}, {cr, wr}, {cj, -static_cast<double>(K)}, {blend->z[k], KM}};
          auto& r9 = rb.add("l9", element, RowSense::LessEqual, KM, true);
          r9.terms = {{cj, static_cast<double>(K)}, {ci, -wi}, {cr, -wr}, {blend->z[k], KM}};
        }
        auto& r10 = rb.add("l10", element, RowSense::LessEqual, 2 * M, true);
        r10.terms = {{cr, rate}, {cj, -1.0}, {blend->z[0], M}, {yr, M}};
        auto& r11 = rb.add("l11", element, RowSense::LessEqual, 2 * M, true);
        r11.terms = {{cj, 1.0}, {cr, -rate}, {blend->z[0], M}, {yr, M}};
        auto& r12 = rb.add("l12", element, RowSense::LessEqual, M, true);
        r12.terms = {{ci, rate}, {cj, -1.0}, {blend->z[K], M}};
        auto& r13 = rb.add("l13", element, RowSense::LessEqual, M, true);
        r13.terms = {{cj, 1.0}, {ci, -rate}, {blend->z[K], M}};
      }
      if (model.families.exit_limits) {
        if (qa.lower) {
          auto& r = rb.add("nl13", element, RowSense::GreaterEqual, *qa.lower * rate);
          r.terms = {{cj, 1.0}};
        }
        if (qa.upper) {
          auto& r = rb.add("nl14", element, RowSense::LessEqual, *qa.upper * rate);
          r.terms = {{cj, 1.0}};
        }
      }
      if (model.families.entry_limits_rr) entry_limit_rows(rb, model, topo, j, p, qa, element, blend);
    }
  }
  return rows;
}

std::vector<Row> build_conflict_constraints(const MilpModel& model, const CanonicalNetwork& canon,
                                            const std::vector<OptionGroup>& options, ConflictMode mode) {
  std::vector<Row> rows;
  if (mode == ConflictMode::AllOptionsAvailable) return rows;
  Topology topo(canon.network);
  RowBuilder rb(rows);
  std::map<std::string, std::vector<std::size_t>> decisions;
  for (std::size_t o = 0; o < options.size(); ++o) {
    auto w = std::find_if(model.option_vars.begin(), model.option_vars.end(),
                          [&](const auto& v) { return v.first == options[o].name; });
    if (w == model.option_vars.end()) {
      throw Error(ErrorCode::InvalidArgument, "option '" + options[o].name + "' has no decision variable");
    }
    decisions[options[o].decision].push_back(w->second);
    for (const auto& id : options[o].edges) {
      auto e = canonical_edge(canon, topo, id);
      if (!e) throw Error(ErrorCode::InvalidArgument, "option edge '" + id + "' is not in the network");
      auto& r = rb.add("conflict", options[o].name, RowSense::LessEqual, 0.0);
      r.terms = {{model.used[*e], 1.0}, {w->second, -1.0}};
    }
  }
  for (const auto& [decision, vars] : decisions) {
    auto& r = rb.add("conflict", "decision:" + decision, RowSense::LessEqual, 1.0);
    for (auto v : vars) r.terms.push_back({v, 1.0});
  }
  return rows;
}

LinearObjective build_objective(const MilpModel& model, const CanonicalNetwork& canon, const Objective& objective) {
  const auto& net = canon.network;
  Topology topo(net);
  if (objective.kind != ObjectiveKind::TotalFlow && objective.sense != Sense::Minimize) {
    throw Error(ErrorCode::InvalidArgument, "cost and energy objectives must be minimized");
  }
  if (objective.scope.empty()) throw Error(ErrorCode::InvalidArgument, "objective scope is empty");

  // (component whose coefficients apply, canonical edge)
  std::set<std::pair<std::size_t, std::size_t>> charged;
  for (const auto& id : objective.scope) {
    if (auto j = topo.component_index(id); j && !canon.is_inserted_component(id)) {
      auto edges = topo.in_edges(*j).empty() ? topo.out_edges(*j) : original_inflows(canon, topo, *j);
      for (auto e : edges) charged.insert({*j, e});
      continue;
    }
    auto e = canonical_edge(canon, topo, id);
    if (!e) throw Error(ErrorCode::InvalidArgument, "objective scope references unknown element '" + id + "'");
    // The charged component is the original destination of the edge.
    auto arrow = id.find("->");
    auto dest = arrow == std::string::npos ? std::optional<std::size_t>{} : topo.component_index(id.substr(arrow + 2));
    charged.insert({dest.value_or(topo.to_index(*e)), *e});
  }

  std::map<std::size_t, double> coef;
  bool any_coefficient = false;
  for (const auto& [j, e] : charged) {
    const auto& a = net.components[j].attrs;
    switch (objective.kind) {
      case ObjectiveKind::TotalFlow:
        coef[model.flow[e]] += 1.0;
        any_coefficient = true;
        break;
      case ObjectiveKind::Cost:
        if (a.variable_cost || a.fixed_cost) any_coefficient = true;
        if (a.variable_cost) coef[model.flow[e]] += *a.variable_cost;
        if (a.fixed_cost) coef[model.used[e]] += *a.fixed_cost;
        break;
      case ObjectiveKind::Energy:
        if (a.variable_energy || a.fixed_energy) any_coefficient = true;
        if (a.variable_energy) coef[model.flow[e]] += *a.variable_energy;
        if (a.fixed_energy) coef[model.used[e]] += *a.fixed_energy;
        break;
    }
  }
  if (!any_coefficient) {
    throw Error(ErrorCode::EmptyObjective,
                std::string("no ") + std::string(to_string(objective.kind)) + " coefficients in objective scope");
  }
  LinearObjective out;
  out.sense = objective.sense;
  for (const auto& [var, c] : coef) {
    if (c != 0.0) out.terms.push_back({var, c});
  }
  return out;
}

MilpModel build_model(const CanonicalNetwork& net, const Objective& objective, const BuildOptions& opts) {
  const BigMPolicy policy = opts.big_m ? *opts.big_m : derive_big_m(net);
  MilpModel model = declare_variables(net, opts, policy);
  auto append = [&](std::vector<Row> rows) {
    for (auto& r : rows) model.rows.push_back(std::move(r));
  };
  append(build_flow_constraints(model, net));
  append(build_blending_constraints(model, net));
  append(build_quality_constraints(model, net));
  append(build_conflict_constraints(model, net, opts.options, opts.conflict_mode));
  model.objective = build_objective(model, net, objective);
  std::stable_sort(model.rows.begin(), model.rows.end(), [](const Row& a, const Row& b) {
    const int ra = tag_rank(a.tag);
    const int rb = tag_rank(b.tag);
    if (ra != rb) return ra < rb;
    return a.element < b.element;
  });
  return model;
}

CountProfile count_profile(const MilpModel& model) {
  CountProfile p;
  for (const auto& v : model.variables) {
    if (v.type == VarType::Binary) {
      ++p.binary;
    } else {
      ++p.continuous;
    }
  }
  p.constraints = model.rows.size();
  return p;
}

CountProfile analytic_profile(std::size_t edges, std::size_t components_times_pollutants, std::size_t blend_points,
                              int discretization, std::size_t option_vars) {
  CountProfile p;
  p.continuous = edges + components_times_pollutants;
  p.binary = edges + blend_points * static_cast<std::size_t>(discretization + 1) + option_vars;
  return p;
}

std::string write_lp(const MilpModel& model) {
  std::ostringstream out;
  auto write_terms = [&](const std::vector<Term>& terms) {
    if (terms.empty()) {
      out << " 0 " << (model.variables.empty() ? "x" : model.variables.front().name);
      return;
    }
    bool first = true;
    for (const auto& t : terms) {
      const double c = t.coef;
      if (first) {
        out << ' ' << (c < 0 ? "-" : "") << format_number(std::fabs(c)) << ' ' << model.variables[t.var].name;
      } else {
        out << (c < 0 ? " - " : " + ") << format_number(std::fabs(c)) << ' ' << model.variables[t.var].name;
      }
      first = false;
    }
  };

  out << "\\ water network MILP, K = " << model.discretization << '\n';
  out << "\\ columns " << model.variables.size() << ", rows " << model.rows.size() << '\n';
  for (std::size_t e = 0; e < model.edge_ids.size(); ++e) {
    out << "\\ " << model.variables[model.flow[e]].name << ", " << model.variables[model.used[e]].name << " : edge "
        << model.edge_ids[e] << '\n';
  }
  for (std::size_t j = 0; j < model.component_ids.size(); ++j) {
    if (!model.concentration[j].empty()) {
      out << "\\ c" << j << "_* : component " << model.component_ids[j] << '\n';
    }
  }
  for (std::size_t p = 0; p < model.pollutant_ids.size(); ++p) {
    out << "\\ c*_" << p << " : pollutant " << model.pollutant_ids[p] << '\n';
  }
  for (const auto& b : model.blends) {
    out << "\\ z" << b.component << "_k : blend at " << model.component_ids[b.component] << ", first inflow "
        << model.edge_ids[b.first_edge] << '\n';
  }
  for (const auto& [name, var] : model.option_vars) out << "\\ " << model.variables[var].name << " : option " << name << '\n';

  out << (model.objective.sense == Sense::Minimize ? "Minimize" : "Maximize") << '\n';
  out << " obj:";
  write_terms(model.objective.terms);
  out << "\nSubject To\n";
  for (std::size_t i = 0; i < model.rows.size(); ++i) {
    const auto& r = model.rows[i];
    out << ' ' << r.tag << '_' << i << ':';
    write_terms(r.terms);
    switch (r.sense) {
      case RowSense::LessEqual: out << " <= "; break;
      case RowSense::GreaterEqual: out << " >= "; break;
      case RowSense::Equal: out << " = "; break;
    }
    out << format_number(r.rhs) << '\n';
  }
  out << "Bounds\n";
  for (const auto& v : model.variables) {
    if (v.type == VarType::Binary) continue;
    if (std::isinf(v.upper)) {
      out << ' ' << v.name << " >= " << format_number(v.lower) << '\n';
    } else {
      out << ' ' << format_number(v.lower) << " <= " << v.name << " <= " << format_number(v.upper) << '\n';
    }
  }
  out << "Binaries\n";
  for (const auto& v : model.variables) {
    if (v.type == VarType::Binary) out << ' ' << v.name << '\n';
  }
  out << "End\n";
  return out.str();
}

}  // namespace wnopt
