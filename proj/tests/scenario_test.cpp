#include <gtest/gtest.h>

#include <cmath>

#include "instances.hpp"
#include "wnopt/gen.hpp"
#include "wnopt/scenario.hpp"

using namespace wnopt;
using namespace wnopt::testing;

namespace {

// S feeds D through TA (route:A) or TB (route:B). TA is cheaper per unit but
// capped; the cap is drawn per trial.
Network routes() {
  Network net;
  add_pollutant(net, "p");
  add_component(net, "S", ComponentTag::WastewaterSource).attrs.supply = 10.0;
  quality(net, "S", "p").given = 5.0;
  auto& ta = add_component(net, "TA", ComponentTag::Treatment).attrs;
  ta.capacity = 10.0;
  ta.variable_cost = 1.0;
  auto& tb = add_component(net, "TB", ComponentTag::Treatment).attrs;
  tb.variable_cost = 2.0;
  add_component(net, "D", ComponentTag::Discharge);
  add_edge(net, "S", "TA").option_group = "route:A";
  add_edge(net, "S", "TB").option_group = "route:B";
  add_edge(net, "TA", "D");
  add_edge(net, "TB", "D");
  net.objective = Objective{ObjectiveKind::Cost, Sense::Minimize, {"TA", "TB"}};
  return net;
}

TrialConfig routes_config(std::size_t n) {
  TrialConfig c;
  c.n_trials = n;
  c.seed = 4;
  c.engine.discretization = 10;
  c.engine.conflict_mode = ConflictMode::AllOptionsAvailable;
  c.specs.push_back({"TA", "capacity", std::nullopt, std::pair{6.0, 14.0}});
  return c;
}

Solution with_flows(std::map<std::string, double> flows) {
  Solution sol;
  sol.status = SolveStatus::Optimal;
  sol.flows = std::move(flows);
  return sol;
}

}  // namespace

TEST(Sampling, UniformMeanAndRange) {
  ParameterSpec spec{"X", "capacity", std::nullopt, std::pair{0.0, 1.0}};
  double sum = 0.0;
  const int n = 10000;
  for (int t = 0; t < n; ++t) {
    const double v = sample_value(spec, 12, static_cast<std::size_t>(t), 0);
    ASSERT_GE(v, 0.0);
    ASSERT_LT(v, 1.0);
    sum += v;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.02);
}

TEST(Sampling, DegenerateRangeAndCrispValue) {
  ParameterSpec flat{"X", "capacity", std::nullopt, std::pair{3.0, 3.0}};
  ParameterSpec crisp{"X", "capacity", 7.0, std::nullopt};
  for (std::size_t t = 0; t < 20; ++t) {
    EXPECT_EQ(sample_value(flat, 1, t, 0), 3.0);
    EXPECT_EQ(sample_value(crisp, 1, t, 0), 7.0);
  }
}

TEST(Sampling, SameKeySameDrawAcrossNetworks) {
  ParameterSpec spec{"TA", "capacity", std::nullopt, std::pair{6.0, 14.0}};
  auto a = routes();
  auto b = routes();
  add_component(b, "extra", ComponentTag::Tank);
  for (std::size_t t = 0; t < 10; ++t) {
    const auto sa = sample_instance(a, {spec}, 9, t);
    const auto sb = sample_instance(b, {spec}, 9, t);
    EXPECT_EQ(sa.find_component("TA")->attrs.capacity, sb.find_component("TA")->attrs.capacity);
  }
  EXPECT_NE(sample_value(spec, 9, 0, 0), sample_value(spec, 10, 0, 0));
  EXPECT_NE(sample_value(spec, 9, 0, 0), sample_value(spec, 9, 1, 0));
}

TEST(Sampling, UnknownTargets) {
  const auto net = routes();
  ParameterSpec missing{"nope", "capacity", 1.0, std::nullopt};
  ParameterSpec bad_attr{"TA", "colour", 1.0, std::nullopt};
  for (const auto& s : {missing, bad_attr}) {
    try {
      sample_instance(net, {s}, 0, 0);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
    }
  }
  std::vector<std::string> skipped;
  sample_instance(net, {missing, bad_attr}, 0, 0, &skipped);
  EXPECT_EQ(skipped.size(), 2u);
}

TEST(Sampling, InvalidDrawsAreRejected) {
  // A negative supply never validates.
  ParameterSpec spec{"S", "supply", std::nullopt, std::pair{-2.0, -1.0}};
  try {
    sample_instance(routes(), {spec}, 0, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SampleRejected);
  }
}

TEST(Options, ExtractionUsesTheThreshold) {
  const auto net = routes();
  const auto groups = options_from_edges(net);
  const auto sol = with_flows({{"S->TA", 0.0006}, {"S->TB", 0.0004}});
  EXPECT_EQ(extract_options(sol, groups, 0.0005), (std::set<std::string>{"A"}));
  EXPECT_TRUE(extract_options(sol, groups, 0.001).empty());
}

TEST(Trials, ForcedOptionWhenCapacityIsTooSmall) {
  auto net = routes();
  auto config = routes_config(30);
  config.specs = {{"TA", "capacity", std::nullopt, std::pair{0.0, 0.0}}};
  const auto r = run_trials(net, config);
  EXPECT_EQ(r.frequencies.at("B"), 30u);
  EXPECT_FALSE(r.frequencies.count("A"));
  EXPECT_EQ(r.combinations.at("B"), 30u);
}

TEST(Trials, CountsAreConserved) {
  const auto r = run_trials(routes(), routes_config(40));
  std::size_t combos = 0;
  for (const auto& [k, v] : r.combinations) combos += v;
  EXPECT_EQ(combos + r.infeasible + r.unsolved + r.errored, r.n_trials);
  EXPECT_EQ(r.trials.size(), 40u);
  // Capacity above 10 lets A take all the flow; below, both are used.
  EXPECT_GT(r.combinations.at("A"), 0u);
  EXPECT_GT(r.combinations.at("A+B"), 0u);
  EXPECT_EQ(r.frequencies.at("A"), 40u);
}

TEST(Trials, ExclusiveModeUsesAtMostOneOption) {
  auto config = routes_config(30);
  config.engine.conflict_mode = ConflictMode::ExclusiveOptions;
  const auto r = run_trials(routes(), config);
  for (const auto& t : r.trials) EXPECT_LE(t.options.size(), 1u);
  EXPECT_GT(r.frequencies.at("B"), 0u);
}

TEST(Trials, NoTreatmentCapacityIsNeverFeasible) {
  auto net = routes();
  net.find_component("TB")->attrs.capacity = 0.0;
  auto config = routes_config(20);
  config.specs = {{"TA", "capacity", std::nullopt, std::pair{0.0, 0.0}}};
  const auto r = run_trials(net, config);
  EXPECT_EQ(r.infeasible, 20u);
  EXPECT_TRUE(r.combinations.empty());
  EXPECT_EQ(compute_kpis(net, {}).feasibility_count, 0u);
}

TEST(Trials, DeterministicAndIndependentOfJobs) {
  const auto net = generate(Shape::Refinery, Variant::Updated, 2);
  auto config = suggested_trials(Shape::Refinery, Variant::Updated, 2);
  config.n_trials = 12;
  config.engine.discretization = 10;
  const auto a = trial_result_to_json(run_trials(net, config, 1));
  const auto b = trial_result_to_json(run_trials(net, config, 1));
  const auto c = trial_result_to_json(run_trials(net, config, 3));
  EXPECT_EQ(a.dump(), b.dump());
  EXPECT_EQ(a.dump(), c.dump());
  config.seed += 1;
  EXPECT_NE(a.dump(), trial_result_to_json(run_trials(net, config, 1)).dump());
}

TEST(TrialConfig, JsonRoundTripAndErrors) {
  auto config = routes_config(25);
  config.engine.options = options_from_edges(routes());
  const auto doc = trial_config_to_json(config);
  EXPECT_EQ(trial_config_to_json(trial_config_from_json(doc)), doc);

  auto bad = doc;
  bad["n_trials"] = 0;
  auto flipped = doc;
  flipped["parameters"][0]["range"] = Json::array({5.0, 1.0});
  auto dup = doc;
  dup["optionsCompared"].push_back(dup["optionsCompared"][0]);
  for (const auto& d : {bad, flipped, dup}) {
    try {
      trial_config_from_json(d);
      ADD_FAILURE() << d.dump();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
    }
  }
  auto both = doc;
  both["parameters"][0]["value"] = 1.0;
  try {
    trial_config_from_json(both);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
  }
}

TEST(Kpi, PassThroughIsFullyDischarged) {
  auto net = chain(10.0, 5.0, 1.0);
  net.find_component("T")->attrs.reduction_rate = 1.0;
  const auto k = trial_kpi(net, with_flows({{"S->T", 10.0}, {"T->D", 10.0}}));
  EXPECT_TRUE(k.feasible);
  EXPECT_DOUBLE_EQ(k.treated, 10.0);
  EXPECT_DOUBLE_EQ(k.discharged_pct, 100.0);
  EXPECT_DOUBLE_EQ(k.losses_pct, 0.0);
  EXPECT_DOUBLE_EQ(k.total_intake, 10.0);
}

TEST(Kpi, LossyTreatmentFeedingReuse) {
  Network net;
  add_pollutant(net, "p");
  add_component(net, "S", ComponentTag::WastewaterSource).attrs.supply = 10.0;
  quality(net, "S", "p").given = 5.0;
  add_component(net, "T", ComponentTag::Treatment).attrs.reduction_rate = 0.9;
  add_component(net, "App", ComponentTag::Application);
  add_edge(net, "S", "T");
  add_edge(net, "T", "App");
  const auto k = trial_kpi(net, with_flows({{"S->T", 10.0}, {"T->App", 9.0}}));
  EXPECT_NEAR(k.losses_pct, 10.0, 1e-12);
  EXPECT_NEAR(k.reused_pct, 90.0, 1e-12);
  EXPECT_NEAR(k.discharged_pct, 0.0, 1e-12);
}

TEST(Kpi, NothingTreated) {
  Network net;
  add_pollutant(net, "p");
  add_component(net, "F", ComponentTag::FreshWaterSource).attrs.supply = 4.0;
  quality(net, "F", "p").given = 0.0;
  add_component(net, "App", ComponentTag::Application);
  add_edge(net, "F", "App");
  const auto k = trial_kpi(net, with_flows({{"F->App", 4.0}}));
  EXPECT_TRUE(k.zero_treated);
  EXPECT_EQ(k.freshwater, 4.0);
  EXPECT_EQ(k.reused, 0.0);
  const auto r = compute_kpis(net, {with_flows({{"F->App", 4.0}})});
  EXPECT_EQ(r.zero_treated_trials, 1u);
  EXPECT_EQ(r.avg_freshwater_intake, 4.0);
  EXPECT_EQ(r.discharged_pct, 0.0);
}

TEST(Kpi, InfeasibleTrialsAreNotAveraged) {
  const auto net = chain(10.0, 5.0, 1.0);
  Solution bad;
  bad.status = SolveStatus::Infeasible;
  const auto r = compute_kpis(net, {with_flows({{"S->T", 10.0}, {"T->D", 10.0}}), bad});
  EXPECT_EQ(r.trials, 2u);
  EXPECT_EQ(r.feasibility_count, 1u);
  EXPECT_DOUBLE_EQ(r.avg_wastewater_treated, 10.0);
}

TEST(Compare, IdenticalNetworksGiveIdenticalReports) {
  const auto net = generate(Shape::Refinery, Variant::Current, 3);
  auto config = suggested_trials(Shape::Refinery, Variant::Current, 3);
  config.n_trials = 6;
  config.engine.discretization = 10;
  const auto c = compare_networks(net, net, config);
  EXPECT_EQ(kpi_report_to_json(c.current), kpi_report_to_json(c.updated));
  ASSERT_EQ(c.current_trials.size(), 6u);
  EXPECT_TRUE(c.skipped.empty());
}

TEST(Compare, InapplicableSpecsAreListed) {
  const auto current = generate(Shape::Refinery, Variant::Current, 3);
  const auto updated = generate(Shape::Refinery, Variant::Updated, 3);
  auto config = suggested_trials(Shape::Refinery, Variant::Updated, 3);
  config.n_trials = 4;
  config.engine.discretization = 10;
  const auto c = compare_networks(current, updated, config);
  ASSERT_FALSE(c.skipped.empty());
  for (const auto& s : c.skipped) EXPECT_TRUE(s.starts_with("current: ")) << s;
  const auto doc = comparison_to_json(c);
  EXPECT_TRUE(doc.contains("current"));
  EXPECT_TRUE(doc.contains("updated"));
}
