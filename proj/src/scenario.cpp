#include "wnopt/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <random>
#include <thread>

#include "wnopt/error.hpp"

namespace wnopt {

namespace {

constexpr std::size_t kMaxResamples = 100;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string spec_key(const ParameterSpec& spec) { return spec.element + "." + spec.attribute; }

Json spec_to_json(const ParameterSpec& spec) {
  Json out{{"element", spec.element}, {"attribute", spec.attribute}};
  if (spec.value) out["value"] = *spec.value;
  if (spec.range) {
    out["range"] = Json::array({spec.range->first, spec.range->second});
    out["distribution"] = "uniform";
  }
  return out;
}

ParameterSpec spec_from_json(const Json& item) {
  if (!item.is_object()) throw Error(ErrorCode::ParseError, "parameter spec must be an object");
  ParameterSpec spec;
  spec.element = json_field::required_string(item, "element");
  spec.attribute = json_field::required_string(item, "attribute");
  spec.value = json_field::number(item, "value");
  if (auto it = item.find("range"); it != item.end()) {
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number()) {
      throw Error(ErrorCode::ParseError, "range of " + spec_key(spec) + " must be [lower, upper]");
    }
    spec.range = std::pair{(*it)[0].get<double>(), (*it)[1].get<double>()};
    if (spec.range->first > spec.range->second) {
      throw Error(ErrorCode::InvalidArgument, "range of " + spec_key(spec) + " has lower > upper");
    }
  }
  if (auto d = json_field::string(item, "distribution"); d && *d != "uniform") {
    throw Error(ErrorCode::ParseError, "unsupported distribution '" + *d + "'");
  }
  if (spec.value.has_value() == spec.range.has_value()) {
    throw Error(ErrorCode::ParseError, "parameter " + spec_key(spec) + " needs exactly one of value and range");
  }
  return spec;
}

std::string combination_key(const std::vector<std::string>& options) {
  if (options.empty()) return "none";
  std::string key;
  for (const auto& o : options) key += (key.empty() ? "" : "+") + o;
  return key;
}

std::vector<OptionGroup> groups_for(const Network& net, const TrialConfig& config, std::vector<std::string>* skipped,
                                    const std::string& label) {
  if (!config.engine.options) return options_from_edges(net);
  std::vector<OptionGroup> kept;
  for (const auto& g : *config.engine.options) {
    bool present = std::all_of(g.edges.begin(), g.edges.end(), [&](const auto& e) { return net.find_edge(e); });
    if (present) {
      kept.push_back(g);
    } else if (skipped) {
      skipped->push_back(label + ": option " + g.name);
    }
  }
  return kept;
}

template <class F>
void parallel_for(std::size_t n, std::size_t jobs, F&& body) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t j = 0; j < jobs; ++j) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

TrialRecord solve_trial(const Network& base, const TrialConfig& config, const EngineOptions& engine,
                        std::size_t index) {
  TrialRecord rec;
  rec.index = index;
  const auto start = std::chrono::steady_clock::now();
  try {
    const Network net = sample_instance(base, config.specs, config.seed, index, nullptr);
    rec.digest = hex64(fnv1a(dump_network(net)));
    const auto objective = resolve_objective(net, config.objective);
    auto result = optimize(net, objective, engine);
    rec.solution = std::move(result.solution);
    rec.status = std::string(to_string(rec.solution.status));
    if (has_flows(rec.solution.status)) {
      rec.objective = rec.solution.objective_value;
      for (const auto& [name, w] : rec.solution.options) {
        if (w) rec.options.push_back(name);
      }
    }
  } catch (const std::exception& e) {
    rec.status = "errored";
    rec.error = e.what();
    rec.options.clear();
    rec.objective.reset();
  }
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

// Specs that apply to `net`; the rest are reported once.
std::vector<ParameterSpec> applicable_specs(const Network& net, const std::vector<ParameterSpec>& specs,
                                            std::vector<std::string>& skipped, const std::string& label) {
  std::vector<ParameterSpec> out;
  for (const auto& s : specs) {
    if (attribute_slot(net, s.element, s.attribute)) {
      out.push_back(s);
    } else {
      skipped.push_back(label + ": " + spec_key(s));
    }
  }
  return out;
}

std::vector<TrialRecord> solve_all(const Network& base, const TrialConfig& config, std::size_t jobs) {
  std::vector<TrialRecord> records(config.n_trials);
  parallel_for(config.n_trials, jobs,
               [&](std::size_t i) { records[i] = solve_trial(base, config, config.engine, i); });
  return records;
}

}  // namespace

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

Json trial_config_to_json(const TrialConfig& config) {
  Json out = Json::object();
  out["n_trials"] = config.n_trials;
  out["seed"] = config.seed;
  if (config.objective) out["objective"] = objective_to_json(*config.objective);
  Json engine = engine_options_to_json(config.engine);
  for (auto& [key, value] : engine.items()) {
    if (key == "options") {
      out["optionsCompared"] = value;
    } else {
      out[key] = value;
    }
  }
  Json params = Json::array();
  for (const auto& s : config.specs) params.push_back(spec_to_json(s));
  out["parameters"] = std::move(params);
  return out;
}

TrialConfig trial_config_from_json(const Json& doc, EngineOptions base) {
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, "trial config must be an object");
  TrialConfig config;
  if (auto it = doc.find("n_trials"); it != doc.end()) {
    if (!it->is_number_integer() || it->get<long long>() < 1) {
      throw Error(ErrorCode::InvalidArgument, "n_trials must be a positive integer");
    }
    config.n_trials = it->get<std::size_t>();
  }
  if (auto it = doc.find("seed"); it != doc.end()) {
    if (!it->is_number_integer()) throw Error(ErrorCode::ParseError, "seed must be an integer");
    config.seed = it->is_number_unsigned() ? it->get<std::uint64_t>()
                                           : static_cast<std::uint64_t>(it->get<std::int64_t>());
  }
  if (auto it = doc.find("objective"); it != doc.end()) config.objective = objective_from_json(*it);
  Json engine = Json::object();
  for (const auto& [key, value] : doc.items()) {
    if (key == "optionsCompared") {
      engine["options"] = value;
    } else if (key == "backend" || key == "discretization" || key == "mu" || key == "limits" ||
               key == "conflict_mode" || key == "exit_limits" || key == "entry_limits_rr") {
      engine[key] = value;
    }
  }
  config.engine = engine_options_from_json(engine, std::move(base));
  if (config.engine.options) {
    std::set<std::string> names;
    for (const auto& g : *config.engine.options) {
      if (!names.insert(g.name).second) throw Error(ErrorCode::InvalidArgument, "duplicate option '" + g.name + "'");
    }
  }
  if (auto it = doc.find("parameters"); it != doc.end()) {
    if (!it->is_array()) throw Error(ErrorCode::ParseError, "parameters must be an array");
    for (const auto& item : *it) config.specs.push_back(spec_from_json(item));
  }
  return config;
}

double sample_value(const ParameterSpec& spec, std::uint64_t seed, std::size_t trial, std::size_t attempt) {
  if (spec.value) return *spec.value;
  const auto [lo, hi] = *spec.range;
  const std::uint64_t key = fnv1a(spec_key(spec));
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(key),
                    static_cast<std::uint32_t>(key >> 32), static_cast<std::uint32_t>(attempt)};
  std::mt19937_64 rng(seq);
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

Network sample_instance(const Network& base, const std::vector<ParameterSpec>& specs, std::uint64_t seed,
                        std::size_t trial, std::vector<std::string>* skipped) {
  for (const auto& s : specs) {
    if (attribute_slot(base, s.element, s.attribute)) continue;
    if (!skipped) throw Error(ErrorCode::InvalidArgument, "no attribute " + spec_key(s) + " in the network");
    skipped->push_back(spec_key(s));
  }
  for (std::size_t attempt = 0; attempt < kMaxResamples; ++attempt) {
    Network net = base;
    for (const auto& s : specs) {
      if (auto* slot = attribute_slot(net, s.element, s.attribute)) *slot = sample_value(s, seed, trial, attempt);
    }
    if (validate(net).ok()) return net;
  }
  throw Error(ErrorCode::SampleRejected,
              "trial " + std::to_string(trial) + " drew no valid instance in " + std::to_string(kMaxResamples) +
                  " attempts");
}

std::set<std::string> extract_options(const Solution& solution, const std::vector<OptionGroup>& groups, double mu) {
  std::set<std::string> used;
  for (const auto& g : groups) {
    for (const auto& e : g.edges) {
      if (solution.flow(e) >= mu - 1e-9) {
        used.insert(g.name);
        break;
      }
    }
  }
  return used;
}

Json trial_result_to_json(const TrialResult& result) {
  Json out = Json::object();
  out["n_trials"] = result.n_trials;
  out["frequencies"] = result.frequencies;
  out["combinations"] = result.combinations;
  out["none"] = result.none;
  out["infeasible"] = result.infeasible;
  out["unsolved"] = result.unsolved;
  out["errored"] = result.errored;
  Json trials = Json::array();
  for (const auto& t : result.trials) {
    Json item{{"index", t.index}, {"digest", t.digest}, {"status", t.status}, {"options", t.options}};
    item["objective"] = t.objective ? Json(*t.objective) : Json(nullptr);
    if (!t.error.empty()) item["error"] = t.error;
    trials.push_back(std::move(item));
  }
  out["trials"] = std::move(trials);
  return out;
}

TrialResult run_trials(const Network& base, const TrialConfig& config, std::size_t jobs) {
  if (config.n_trials < 1) throw Error(ErrorCode::InvalidArgument, "n_trials must be at least 1");
  const auto start = std::chrono::steady_clock::now();
  TrialResult result;
  result.n_trials = config.n_trials;
  result.trials = solve_all(base, config, jobs);
  for (const auto& t : result.trials) {
    if (t.status == "errored") {
      ++result.errored;
    } else if (t.status == to_string(SolveStatus::Infeasible)) {
      ++result.infeasible;
    } else if (!t.objective) {
      ++result.unsolved;
    } else {
      for (const auto& o : t.options) ++result.frequencies[o];
      ++result.combinations[combination_key(t.options)];
      if (t.options.empty()) ++result.none;
    }
  }
  result.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

TrialKpi trial_kpi(const Network& net, const Solution& solution) {
  TrialKpi k;
  if (!has_flows(solution.status)) return k;
  k.feasible = true;
  const Topology topo(net);
  const std::size_t n = topo.component_count();
  std::vector<double> in(n, 0.0), out(n, 0.0);
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    const double f = solution.flow(net.edges[e].id());
    out[topo.from_index(e)] += f;
    in[topo.to_index(e)] += f;
  }
  // Components reached by treated water along edges with positive flow.
  std::vector<char> treated_path(n, 0);
  if (const auto& order = topo.topological_order()) {
    for (std::size_t c : *order) {
      if (net.components[c].tag == ComponentTag::Treatment) treated_path[c] = 1;
      if (!treated_path[c]) continue;
      for (std::size_t e : topo.out_edges(c)) {
        if (solution.flow(net.edges[e].id()) > 1e-9) treated_path[topo.to_index(e)] = 1;
      }
    }
  }
  for (std::size_t c = 0; c < n; ++c) {
    const auto tag = net.components[c].tag;
    if (tag == ComponentTag::Treatment) k.treated += in[c];
    if (tag == ComponentTag::Discharge) k.discharged += in[c];
    if (tag == ComponentTag::FreshWaterSource) k.freshwater += out[c];
    const Role role = role_of(topo, c);
    if (role == Role::Provider) k.total_intake += out[c];
    if (role == Role::Intermediate) k.losses += in[c] - out[c];
    if (tag == ComponentTag::Application) {
      for (std::size_t e : topo.in_edges(c)) {
        if (treated_path[topo.from_index(e)]) k.reused += solution.flow(net.edges[e].id());
      }
    }
  }
  if (k.treated > 1e-9) {
    k.discharged_pct = 100.0 * k.discharged / k.treated;
    k.reused_pct = 100.0 * k.reused / k.treated;
    k.losses_pct = 100.0 * k.losses / k.treated;
  } else {
    k.zero_treated = true;
  }
  return k;
}

namespace {

KpiReport aggregate(const std::vector<TrialKpi>& trials) {
  KpiReport r;
  r.trials = trials.size();
  for (const auto& k : trials) {
    if (!k.feasible) continue;
    ++r.feasibility_count;
    r.avg_wastewater_treated += k.treated;
    r.discharged_pct += k.discharged_pct;
    r.reused_pct += k.reused_pct;
    r.losses_pct += k.losses_pct;
    r.avg_freshwater_intake += k.freshwater;
    r.avg_total_intake += k.total_intake;
    if (k.zero_treated) ++r.zero_treated_trials;
  }
  if (r.feasibility_count) {
    const double n = static_cast<double>(r.feasibility_count);
    r.avg_wastewater_treated /= n;
    r.discharged_pct /= n;
    r.reused_pct /= n;
    r.losses_pct /= n;
    r.avg_freshwater_intake /= n;
    r.avg_total_intake /= n;
  }
  return r;
}

}  // namespace

KpiReport compute_kpis(const Network& net, const std::vector<Solution>& solutions) {
  std::vector<TrialKpi> trials;
  trials.reserve(solutions.size());
  for (const auto& s : solutions) trials.push_back(trial_kpi(net, s));
  return aggregate(trials);
}

Json kpi_report_to_json(const KpiReport& r) {
  return Json{{"trials", r.trials},
              {"feasibility_count", r.feasibility_count},
              {"avg_wastewater_treated", r.avg_wastewater_treated},
              {"discharged_pct", r.discharged_pct},
              {"reused_pct", r.reused_pct},
              {"losses_pct", r.losses_pct},
              {"avg_freshwater_intake", r.avg_freshwater_intake},
              {"avg_total_intake", r.avg_total_intake},
              {"zero_treated_trials", r.zero_treated_trials}};
}

Comparison compare_networks(const Network& current, const Network& updated, const TrialConfig& config,
                            std::size_t jobs) {
  Comparison cmp;
  auto run = [&](const Network& net, const std::string& label, std::vector<TrialKpi>& kpis) {
    TrialConfig local = config;
    local.specs = applicable_specs(net, config.specs, cmp.skipped, label);
    local.engine.options = groups_for(net, config, &cmp.skipped, label);
    const auto records = solve_all(net, local, jobs);
    kpis.clear();
    for (const auto& r : records) {
      kpis.push_back(r.status == "errored" ? TrialKpi{} : trial_kpi(net, r.solution));
    }
  };
  run(current, "current", cmp.current_trials);
  run(updated, "updated", cmp.updated_trials);
  cmp.current = aggregate(cmp.current_trials);
  cmp.updated = aggregate(cmp.updated_trials);
  return cmp;
}

Json comparison_to_json(const Comparison& c) {
  return Json{{"current", kpi_report_to_json(c.current)},
              {"updated", kpi_report_to_json(c.updated)},
              {"skipped", c.skipped}};
}

}  // namespace wnopt
