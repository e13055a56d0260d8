#include <gtest/gtest.h>

#include <random>

#include "instances.hpp"
#include "wnopt/engine.hpp"
#include "wnopt/oracle.hpp"

using namespace wnopt;
using namespace wnopt::testing;

namespace {

Network blend(double ca, double cb) {
  Network net;
  add_pollutant(net, "p");
  add_component(net, "A", ComponentTag::WastewaterSource).attrs.capacity = 10.0;
  quality(net, "A", "p").given = ca;
  add_component(net, "B", ComponentTag::WastewaterSource).attrs.capacity = 10.0;
  quality(net, "B", "p").given = cb;
  add_component(net, "T", ComponentTag::Treatment);
  add_component(net, "D", ComponentTag::Discharge);
  add_edge(net, "A", "T");
  add_edge(net, "B", "T");
  add_edge(net, "T", "D");
  return net;
}

bool has_tag(const FeasibilityReport& r, const std::string& tag, const std::string& element) {
  for (const auto& v : r.violations) {
    if (v.tag == tag && v.element == element) return true;
  }
  return false;
}

}  // namespace

TEST(Propagate, RateScalesTheInlet) {
  const auto net = chain(10.0, 50.0, 0.6);
  const auto q = propagate_quality(net, {{"S->T", 10.0}, {"T->D", 10.0}});
  EXPECT_NEAR(q.at("S").at("cod"), 50.0, 1e-12);
  EXPECT_NEAR(q.at("T").at("cod"), 30.0, 1e-12);
  EXPECT_NEAR(q.at("D").at("cod"), 30.0, 1e-12);
}

TEST(Propagate, BlendIsFlowWeighted) {
  const auto net = blend(4.0, 6.0);
  const auto q = propagate_quality(net, {{"A->T", 3.0}, {"B->T", 3.0}, {"T->D", 6.0}});
  EXPECT_NEAR(q.at("T").at("p"), 5.0, 1e-12);
  const auto q2 = propagate_quality(net, {{"A->T", 1.0}, {"B->T", 3.0}, {"T->D", 4.0}});
  EXPECT_NEAR(q2.at("T").at("p"), 5.5, 1e-12);
  EXPECT_NEAR(inlet_quality(net, {{"A->T", 1.0}, {"B->T", 3.0}, {"T->D", 4.0}}).at("T").at("p"), 5.5, 1e-12);
}

TEST(Propagate, FixedExitOverridesTheInlet) {
  auto net = blend(4.0, 6.0);
  quality(net, "T", "p").fixed_exit = 2.0;
  const auto q = propagate_quality(net, {{"A->T", 1.0}, {"B->T", 3.0}, {"T->D", 4.0}});
  EXPECT_EQ(q.at("T").at("p"), 2.0);
  EXPECT_EQ(q.at("D").at("p"), 2.0);
}

TEST(Propagate, InactiveComponentsAreAbsent) {
  const auto net = blend(4.0, 6.0);
  const auto q = propagate_quality(net, {{"A->T", 0.0}, {"B->T", 0.0}, {"T->D", 0.0}});
  EXPECT_TRUE(q.count("A"));
  EXPECT_FALSE(q.count("T"));
  EXPECT_FALSE(q.count("D"));
}

TEST(Propagate, StructuralErrorsThrow) {
  auto net = blend(4.0, 6.0);
  add_pollutant(net, "oil");
  try {
    propagate_quality(net, {{"A->T", 1.0}, {"B->T", 1.0}, {"T->D", 2.0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingQuality);
  }
  Network cyc;
  add_component(cyc, "A", ComponentTag::Treatment);
  add_component(cyc, "B", ComponentTag::Treatment);
  add_edge(cyc, "A", "B");
  add_edge(cyc, "B", "A");
  try {
    check_feasibility(cyc, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Cyclic);
  }
}

TEST(Check, FeasibleChain) {
  auto net = chain(10.0, 50.0, 0.6);
  quality(net, "D", "cod").upper = 30.0;
  const auto r = check_feasibility(net, {{"S->T", 10.0}, {"T->D", 10.0}}, {}, *net.objective);
  EXPECT_TRUE(r.feasible);
  EXPECT_TRUE(r.violations.empty());
  EXPECT_NEAR(*r.objective_value, 10.0, 1e-12);
}

TEST(Check, ReportsEveryBrokenFamily) {
  auto net = chain(10.0, 50.0, 0.6);
  net.find_component("S")->attrs.supply = 10.0;
  net.find_component("S")->attrs.capacity.reset();
  net.find_component("T")->attrs.capacity = 8.0;
  net.find_component("D")->attrs.demand = 12.0;
  net.edges[1].capacity = 5.0;
  quality(net, "D", "cod").upper = 20.0;
  const auto r = check_feasibility(net, {{"S->T", 9.0}, {"T->D", 9.5}});
  EXPECT_FALSE(r.feasible);
  EXPECT_TRUE(has_tag(r, "nl1", "S"));
  EXPECT_TRUE(has_tag(r, "nl2", "D"));
  EXPECT_TRUE(has_tag(r, "nl3", "T"));
  EXPECT_TRUE(has_tag(r, "nl4", "T"));
  EXPECT_TRUE(has_tag(r, "nl5", "T->D"));
  EXPECT_TRUE(has_tag(r, "nl7", "T"));
  EXPECT_TRUE(has_tag(r, "nl14", "D/cod"));
  for (const auto& v : r.violations) EXPECT_GT(v.slack, 0.0) << v.tag;
}

TEST(Check, TrickleBelowMinimumFlow) {
  const auto net = chain(10.0, 50.0, 1.0);
  const auto r = check_feasibility(net, {{"S->T", 1e-4}, {"T->D", 1e-4}});
  EXPECT_TRUE(has_tag(r, "nl6", "S->T"));
}

TEST(Check, FixedOutflow) {
  auto net = chain(1000.0, 50.0, 1.0);
  net.find_component("S")->attrs.supply.reset();
  net.find_component("S")->attrs.capacity = 1000.0;
  net.find_component("T")->attrs.reduction_rate.reset();
  net.find_component("T")->attrs.fixed_outflow = 300.0;
  EXPECT_TRUE(check_feasibility(net, {{"S->T", 500.0}, {"T->D", 300.0}}).feasible);
  EXPECT_TRUE(has_tag(check_feasibility(net, {{"S->T", 500.0}, {"T->D", 200.0}}), "nl8", "T"));
  EXPECT_TRUE(has_tag(check_feasibility(net, {{"S->T", 0.0}, {"T->D", 300.0}}), "nl10", "T"));
  EXPECT_TRUE(check_feasibility(net, {{"S->T", 0.0}, {"T->D", 0.0}}).feasible);
}

TEST(Check, EntryLimitsApplyToFixedExitComponents) {
  auto net = blend(10.0, 30.0);
  quality(net, "T", "p").fixed_exit = 1.0;
  quality(net, "T", "p").upper = 15.0;
  const FlowMap flows{{"A->T", 1.0}, {"B->T", 1.0}, {"T->D", 2.0}};
  EXPECT_TRUE(has_tag(check_feasibility(net, flows), "nl18", "T/p"));
  EXPECT_TRUE(check_feasibility(net, {{"A->T", 3.0}, {"B->T", 1.0}, {"T->D", 4.0}}).feasible);
}

TEST(Check, ReportJson) {
  const auto net = chain(10.0, 50.0, 1.0);
  const auto j = report_to_json(check_feasibility(net, {{"S->T", 20.0}, {"T->D", 20.0}}));
  EXPECT_FALSE(j["feasible"].get<bool>());
  ASSERT_FALSE(j["violations"].empty());
  EXPECT_EQ(j["violations"][0]["tag"], "nl1");
  EXPECT_EQ(j["violations"][0]["element"], "S");
  EXPECT_EQ(j["violations"][0]["slack"], 10.0);
}

TEST(Check, ScaleInvarianceOfQuality) {
  // Scaling every flow and flow attribute leaves concentrations unchanged.
  std::mt19937_64 rng(83);
  for (int i = 0; i < 30; ++i) {
    const auto inst = random_instance(rng);
    EngineOptions opts;
    opts.discretization = inst.discretization;
    const auto sol = optimize(inst.net, inst.objective, opts).solution;
    if (!has_flows(sol.status)) continue;
    FlowMap scaled;
    for (const auto& [e, f] : sol.flows) scaled[e] = 3.0 * f;
    const auto a = propagate_quality(inst.net, sol.flows);
    const auto b = propagate_quality(inst.net, scaled);
    ASSERT_EQ(a.size(), b.size());
    for (const auto& [c, ps] : a) {
      for (const auto& [p, v] : ps) EXPECT_NEAR(b.at(c).at(p), v, 1e-9 * std::max(1.0, v));
    }
  }
}

TEST(BruteForce, FindsTheBlendOptimum) {
  auto net = blend(10.0, 30.0);
  quality(net, "D", "p").upper = 15.0;
  const Objective obj{ObjectiveKind::TotalFlow, Sense::Maximize, {"D"}};
  const auto r = brute_force(net, obj, 0.5);
  ASSERT_TRUE(r.found);
  // 10 of A blended with 10/3 of B; the grid allows 3.0.
  EXPECT_NEAR(r.objective_value, 13.0, 1e-9);
  EXPECT_TRUE(check_feasibility(net, r.flows).feasible);
  EXPECT_GT(r.points, 0u);
}

TEST(BruteForce, InfeasibleDemandFindsNothing) {
  auto net = chain(10.0, 50.0, 1.0);
  net.find_component("D")->attrs.demand = 20.0;
  EXPECT_FALSE(brute_force(net, *net.objective, 1.0).found);
}

TEST(BruteForce, ExplosionGuard) {
  const auto net = blend(10.0, 30.0);
  const Objective obj{ObjectiveKind::TotalFlow, Sense::Maximize, {"D"}};
  try {
    brute_force(net, obj, 1e-4, {}, 1e4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ExplosionGuard);
  }
}

TEST(BruteForce, ReturnedPointPassesTheChecker) {
  std::mt19937_64 rng(89);
  for (int i = 0; i < 8; ++i) {
    const auto inst = lattice_blend_instance(rng, 4 + i % 3);
    const auto bf = brute_force(inst.net, inst.objective, 0.01);
    ASSERT_TRUE(bf.found) << inst.label;
    EXPECT_TRUE(check_feasibility(inst.net, bf.flows).feasible) << inst.label;
    EXPECT_NEAR(evaluate_objective(inst.net, inst.objective, bf.flows), bf.objective_value, 1e-9);
  }
}
