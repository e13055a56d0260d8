#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "instances.hpp"
#include "wnopt/error.hpp"
#include "wnopt/gen.hpp"
#include "wnopt/network.hpp"
#include "wnopt/network_io.hpp"

using namespace wnopt;
using namespace wnopt::testing;

namespace {

Network three_node() {
  Network net;
  add_pollutant(net, "cod");
  add_component(net, "S", ComponentTag::WastewaterSource).attrs.supply = 100.0;
  quality(net, "S", "cod").given = 50.0;
  add_component(net, "T", ComponentTag::Treatment);
  add_component(net, "D", ComponentTag::Discharge);
  add_edge(net, "S", "T");
  add_edge(net, "T", "D");
  return net;
}

}  // namespace

TEST(Validate, EmptyNetworkIsClean) {
  const auto report = validate(Network{});
  EXPECT_TRUE(report.ok());
  EXPECT_TRUE(report.violations.empty());
  EXPECT_TRUE(report.warnings.empty());
}

TEST(Validate, ReductionRateAndFixedOutflowConflict) {
  auto net = three_node();
  auto& t = net.find_component("T")->attrs;
  t.reduction_rate = 0.8;
  t.fixed_outflow = 300.0;
  const auto report = validate(net);
  EXPECT_FALSE(report.ok());
  ASSERT_TRUE(report.has("sr_sf_conflict"));
  EXPECT_EQ(report.violations.front().element, "T");
  EXPECT_EQ(report.violations.front().message, "SR/SF conflict");
}

TEST(Validate, QualityRateAndFixedExitConflict) {
  auto net = three_node();
  quality(net, "T", "cod").reduction_rate = 0.5;
  quality(net, "T", "cod").fixed_exit = 10.0;
  EXPECT_TRUE(validate(net).has("rr_rf_conflict"));
}

TEST(Validate, DanglingEndpoint) {
  auto net = three_node();
  add_edge(net, "T", "missing");
  const auto report = validate(net);
  ASSERT_TRUE(report.has("dangling_endpoint"));
  EXPECT_NE(report.violations.front().message.find("dangling endpoint"), std::string::npos);
}

TEST(Validate, ReportsEveryProblemWithoutThrowing) {
  auto net = three_node();
  net.find_component("S")->attrs.supply = -1.0;
  quality(net, "T", "cod").lower = 20.0;
  quality(net, "T", "cod").upper = 10.0;
  add_edge(net, "T", "T");
  add_edge(net, "S", "T");
  auto& e = add_edge(net, "D", "S");
  e.capacity = std::nan("");
  const auto report = validate(net);
  for (const char* code : {"negative_value", "bounds_order", "self_loop", "duplicate_edge", "non_finite_value"}) {
    EXPECT_TRUE(report.has(code)) << code;
  }
}

TEST(Validate, CycleIsReported) {
  Network net;
  add_component(net, "A", ComponentTag::Treatment);
  add_component(net, "B", ComponentTag::Treatment);
  add_edge(net, "A", "B");
  add_edge(net, "B", "A");
  EXPECT_TRUE(validate(net).has("cycle"));
}

TEST(Validate, SourcesTakeNoInflowAndSinksEmitNothing) {
  auto net = three_node();
  add_component(net, "F", ComponentTag::FreshWaterSource);
  add_edge(net, "T", "F");
  add_edge(net, "D", "T");
  const auto report = validate(net);
  EXPECT_TRUE(report.has("source_has_inflow"));
  EXPECT_TRUE(report.has("sink_has_outflow"));
}

TEST(Validate, ObjectiveRules) {
  auto net = three_node();
  net.objective = Objective{ObjectiveKind::Cost, Sense::Maximize, {"T"}};
  EXPECT_TRUE(validate(net).has("objective_sense"));
  net.objective = Objective{ObjectiveKind::TotalFlow, Sense::Maximize, {}};
  EXPECT_TRUE(validate(net).has("objective_scope"));
  net.objective = Objective{ObjectiveKind::TotalFlow, Sense::Maximize, {"nowhere"}};
  EXPECT_TRUE(validate(net).has("objective_scope"));
  net.objective = Objective{ObjectiveKind::TotalFlow, Sense::Maximize, {"S->T", "D"}};
  EXPECT_TRUE(validate(net).ok());
}

TEST(Validate, ProviderWithoutQualityIsAWarning) {
  auto net = three_node();
  add_pollutant(net, "oil");
  const auto report = validate(net);
  EXPECT_TRUE(report.ok());
  ASSERT_EQ(report.warnings.size(), 1u);
  EXPECT_EQ(report.warnings[0].code, "missing_quality");
}

TEST(Validate, IsPureAndIdempotent) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    auto inst = random_instance(rng);
    inst.net.components.back().attrs.supply = -2.0;
    EXPECT_EQ(validate(inst.net), validate(inst.net));
  }
}

TEST(Classify, RolesFollowIncidence) {
  auto net = three_node();
  add_component(net, "X", ComponentTag::Tank);
  const auto c = classify(net);
  EXPECT_EQ(c.roles.at("S"), Role::Provider);
  EXPECT_EQ(c.roles.at("T"), Role::Intermediate);
  EXPECT_EQ(c.roles.at("D"), Role::Receiver);
  EXPECT_EQ(c.roles.at("X"), Role::Unclassified);
  EXPECT_EQ(c.isolated, std::vector<std::string>{"X"});
}

TEST(Classify, PartitionsEveryConnectedComponent) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 100; ++i) {
    const auto inst = random_instance(rng);
    const auto c = classify(inst.net);
    ASSERT_EQ(c.roles.size(), inst.net.components.size());
    Topology topo(inst.net);
    for (std::size_t j = 0; j < inst.net.components.size(); ++j) {
      const auto role = c.roles.at(inst.net.components[j].id);
      const bool in = !topo.in_edges(j).empty(), out = !topo.out_edges(j).empty();
      if (!in && !out) EXPECT_EQ(role, Role::Unclassified);
      else if (!in) EXPECT_EQ(role, Role::Provider);
      else if (!out) EXPECT_EQ(role, Role::Receiver);
      else EXPECT_EQ(role, Role::Intermediate);
    }
  }
}

TEST(Topology, KahnOrderRespectsEdges) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto inst = random_instance(rng);
    Topology topo(inst.net);
    ASSERT_TRUE(topo.topological_order());
    std::vector<std::size_t> pos(inst.net.components.size());
    const auto& order = *topo.topological_order();
    for (std::size_t k = 0; k < order.size(); ++k) pos[order[k]] = k;
    for (std::size_t e = 0; e < inst.net.edges.size(); ++e) EXPECT_LT(pos[topo.from_index(e)], pos[topo.to_index(e)]);
  }
}

TEST(Serialization, RoundTripIsIdentity) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const auto inst = random_instance(rng);
    const auto text = dump_network(inst.net);
    const auto back = parse_network(text);
    EXPECT_EQ(back, inst.net);
    EXPECT_EQ(dump_network(back), text);
  }
}

TEST(Serialization, GeneratedShapesRoundTrip) {
  for (auto shape : {Shape::Refinery, Shape::ChemA, Shape::ChemB}) {
    for (auto variant : {Variant::Current, Variant::Updated}) {
      const auto net = generate(shape, variant, 9);
      EXPECT_EQ(parse_network(dump_network(net)), net);
    }
  }
}

TEST(Serialization, DocumentLayout) {
  const auto net = chain(100.0, 50.0, 0.6);
  const auto doc = network_to_json(net);
  std::vector<std::string> keys;
  for (const auto& [k, v] : doc.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"pollutants", "components", "edges", "objective"}));
  // Absent attributes are omitted rather than written as null.
  EXPECT_FALSE(doc["components"][1].contains("capacity"));
  EXPECT_EQ(dump_network(net).back(), '\n');
}

TEST(Serialization, ExactDecimalsSurvive) {
  auto net = chain(0.1, 1e-7, 0.3333333333333333);
  net.find_component("T")->attrs.capacity = 123456789.125;
  EXPECT_EQ(parse_network(dump_network(net)), net);
}

TEST(Serialization, MalformedDocumentsRaiseParseError) {
  for (const char* text : {"{", "[]", R"({"components": [{"id": "A"}]})",
                           R"({"components": [{"id": "A", "tag": "Volcano"}]})",
                           R"({"components": [{"id": "A", "tag": "Tank", "capacity": "lots"}]})"}) {
    try {
      parse_network(text);
      ADD_FAILURE() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ParseError) << text;
    }
  }
}

TEST(Attributes, SlotsAddressComponentAndEdgeFields) {
  auto net = chain(100.0, 50.0, 0.6);
  net.edges[0].capacity = 7.0;
  ASSERT_NE(attribute_slot(net, "S", "supply"), nullptr);
  EXPECT_EQ(**attribute_slot(net, "S", "supply"), 100.0);
  EXPECT_EQ(**attribute_slot(net, "T", "quality.cod.reduction_rate"), 0.6);
  EXPECT_EQ(**attribute_slot(net, "S->T", "capacity"), 7.0);
  EXPECT_EQ(attribute_slot(net, "S->T", "supply"), nullptr);
  EXPECT_EQ(attribute_slot(net, "nope", "capacity"), nullptr);
  EXPECT_EQ(attribute_slot(net, "T", "quality.cod.colour"), nullptr);
  *attribute_slot(net, "T", "capacity") = 5.0;
  EXPECT_EQ(net.find_component("T")->attrs.capacity, 5.0);
}
