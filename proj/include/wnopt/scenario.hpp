#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wnopt/engine.hpp"

namespace wnopt {

enum class Distribution { Uniform };

// One sampled (or fixed) attribute. Exactly one of `value` and `range` is set.
struct ParameterSpec {
  std::string element;    // component id or edge id
  std::string attribute;  // path understood by attribute_slot()
  std::optional<double> value;
  std::optional<std::pair<double, double>> range;
  Distribution distribution = Distribution::Uniform;
};

struct TrialConfig {
  std::size_t n_trials = 500;
  std::uint64_t seed = 0;
  std::vector<ParameterSpec> specs;
  std::optional<Objective> objective;  // default: the network's own objective
  EngineOptions engine;                // option groups live in engine.options
};

Json trial_config_to_json(const TrialConfig& config);
// Throws Error(ParseError) for malformed documents and Error(InvalidArgument)
// for n_trials < 1, lower > upper or duplicate option names.
TrialConfig trial_config_from_json(const Json& doc, EngineOptions base = {});

// Deterministic 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view text);

// Applies `specs` to a copy of `base`. Range draws use a substream keyed by
// (seed, trial, element.attribute, attempt), so the same attribute receives
// the same value in every network that has it. Instances failing validation
// are redrawn up to 100 times, then Error(SampleRejected). Specs naming an
// element or attribute the network lacks raise Error(InvalidArgument), or are
// appended to `skipped` when it is given.
Network sample_instance(const Network& base, const std::vector<ParameterSpec>& specs, std::uint64_t seed,
                        std::size_t trial, std::vector<std::string>* skipped = nullptr);

// Draw of a single spec, exposed for distribution tests.
double sample_value(const ParameterSpec& spec, std::uint64_t seed, std::size_t trial, std::size_t attempt);

// Options with at least one member edge carrying flow >= mu.
std::set<std::string> extract_options(const Solution& solution, const std::vector<OptionGroup>& groups, double mu);

struct TrialRecord {
  std::size_t index = 0;
  std::string digest;  // of the sampled instance's canonical document
  std::string status;  // a solve status, or "errored"
  std::vector<std::string> options;
  std::optional<double> objective;
  std::string error;
  Solution solution;     // not serialized
  double seconds = 0.0;  // not serialized
};

struct TrialResult {
  std::size_t n_trials = 0;
  std::map<std::string, std::size_t> frequencies;   // per option
  std::map<std::string, std::size_t> combinations;  // "A+B" keyed; "none" when no option carries flow
  std::size_t none = 0;        // solved, no option used
  std::size_t infeasible = 0;
  std::size_t unsolved = 0;    // timed out or unbounded
  std::size_t errored = 0;
  std::vector<TrialRecord> trials;
  double total_seconds = 0.0;  // not serialized
};

// Timing is left out so reruns produce identical bytes.
Json trial_result_to_json(const TrialResult& result);

// Sample, solve and tally every trial. Trials run on `jobs` threads; the
// result does not depend on `jobs`.
TrialResult run_trials(const Network& base, const TrialConfig& config, std::size_t jobs = 1);

struct TrialKpi {
  bool feasible = false;
  double treated = 0.0;
  double discharged = 0.0;
  double reused = 0.0;
  double losses = 0.0;
  double freshwater = 0.0;
  double total_intake = 0.0;
  double discharged_pct = 0.0;
  double reused_pct = 0.0;
  double losses_pct = 0.0;
  bool zero_treated = false;
};

struct KpiReport {
  std::size_t trials = 0;
  std::size_t feasibility_count = 0;
  double avg_wastewater_treated = 0.0;
  double discharged_pct = 0.0;
  double reused_pct = 0.0;
  double losses_pct = 0.0;
  double avg_freshwater_intake = 0.0;
  double avg_total_intake = 0.0;
  std::size_t zero_treated_trials = 0;  // percentages reported as 0
};

TrialKpi trial_kpi(const Network& net, const Solution& solution);
// Averages over solutions that carry flows.
KpiReport compute_kpis(const Network& net, const std::vector<Solution>& solutions);
Json kpi_report_to_json(const KpiReport& report);

struct Comparison {
  KpiReport current;
  KpiReport updated;
  std::vector<TrialKpi> current_trials;
  std::vector<TrialKpi> updated_trials;
  std::vector<std::string> skipped;  // "<network>: <element>.<attribute>" specs not applicable
};

// Runs the same trials on both networks. Option groups whose edges are absent
// from a network are dropped for that network.
Comparison compare_networks(const Network& current, const Network& updated, const TrialConfig& config,
                            std::size_t jobs = 1);
Json comparison_to_json(const Comparison& comparison);

}  // namespace wnopt
