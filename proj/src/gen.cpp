#include "wnopt/gen.hpp"

#include <cmath>
#include <random>

#include "wnopt/error.hpp"

namespace wnopt {

namespace {

// Assembles a network while recording every drawn attribute as a range spec,
// so the same ranges can drive Monte-Carlo trials.
class Builder {
 public:
  explicit Builder(std::uint64_t seed) : rng_(seed) {}

  void pollutants(std::initializer_list<std::string> ids) {
    for (const auto& id : ids) net_.pollutants.push_back({id, id, "mg/L"});
  }

  void add(const std::string& id, ComponentTag tag) { net_.components.push_back({id, tag, {}}); }

  void edge(const std::string& from, const std::string& to, std::optional<std::string> option = std::nullopt) {
    Edge e;
    e.from = from;
    e.to = to;
    e.option_group = std::move(option);
    net_.edges.push_back(std::move(e));
  }

  void fix(const std::string& element, const std::string& path, double value) { *slot(element, path) = value; }

  void draw(const std::string& element, const std::string& path, double lo, double hi) {
    const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    *slot(element, path) = std::round((lo + (hi - lo) * u) * 1000.0) / 1000.0;
    ParameterSpec spec;
    spec.element = element;
    spec.attribute = path;
    spec.range = std::pair{lo, hi};
    specs_.push_back(std::move(spec));
  }

  // One draw per pollutant, ranges in pollutant order.
  void draw_quality(const std::string& element, const std::string& field,
                    std::initializer_list<std::pair<double, double>> ranges) {
    auto it = ranges.begin();
    for (const auto& p : net_.pollutants) {
      if (it == ranges.end()) break;
      draw(element, "quality." + p.id + "." + field, it->first, it->second);
      ++it;
    }
  }

  void fix_quality(const std::string& element, const std::string& field, std::initializer_list<double> values) {
    auto it = values.begin();
    for (const auto& p : net_.pollutants) {
      if (it == values.end()) break;
      fix(element, "quality." + p.id + "." + field, *it++);
    }
  }

  void objective(ObjectiveKind kind, Sense sense, std::vector<std::string> scope) {
    net_.objective = Objective{kind, sense, std::move(scope)};
  }

  Network& network() { return net_; }
  const std::vector<ParameterSpec>& specs() const { return specs_; }

 private:
  std::optional<double>* slot(const std::string& element, const std::string& path) {
    auto* s = attribute_slot(net_, element, path);
    if (!s) throw Error(ErrorCode::InvalidArgument, "generator addressed unknown attribute " + element + "." + path);
    return s;
  }

  Network net_;
  std::mt19937_64 rng_;
  std::vector<ParameterSpec> specs_;
};

void refinery(Builder& b, Variant variant) {
  b.pollutants({"cod", "oil", "tss"});
  b.add("T1", ComponentTag::WastewaterSource);
  b.draw("T1", "capacity", 250, 300);
  b.draw_quality("T1", "given", {{600, 800}, {40, 60}, {150, 250}});
  b.add("T2", ComponentTag::WastewaterSource);
  b.draw("T2", "capacity", 90, 110);
  b.draw_quality("T2", "given", {{900, 1200}, {20, 40}, {80, 120}});
  b.add("Tr1", ComponentTag::Treatment);
  b.draw("Tr1", "capacity", 300, 340);
  b.draw("Tr1", "reduction_rate", 0.88, 0.92);
  b.draw_quality("Tr1", "reduction_rate", {{0.25, 0.35}, {0.1, 0.2}, {0.2, 0.3}});
  b.add("D1", ComponentTag::Discharge);
  b.draw("D1", "capacity", 200, 230);
  b.fix_quality("D1", "upper", {300, 15, 80});
  b.edge("T1", "Tr1");
  b.edge("T2", "Tr1");
  b.edge("Tr1", "D1");
  if (variant == Variant::Current) {
    b.objective(ObjectiveKind::TotalFlow, Sense::Maximize, {"T1", "T2"});
    return;
  }

  b.add("WWS3", ComponentTag::WastewaterSource);
  b.draw("WWS3", "capacity", 40, 60);
  b.draw_quality("WWS3", "given", {{300, 400}, {60, 90}, {50, 80}});
  // Three candidate settings of the same treatment process.
  b.add("Tr2_s1", ComponentTag::Treatment);
  b.draw("Tr2_s1", "capacity", 140, 160);
  b.draw("Tr2_s1", "reduction_rate", 0.96, 0.98);
  b.draw_quality("Tr2_s1", "reduction_rate", {{0.45, 0.5}, {0.4, 0.5}, {0.3, 0.4}});
  b.add("Tr2_s2", ComponentTag::Treatment);
  b.draw("Tr2_s2", "capacity", 240, 260);
  b.draw("Tr2_s2", "reduction_rate", 0.98, 0.99);
  b.draw_quality("Tr2_s2", "reduction_rate", {{0.7, 0.75}, {0.6, 0.7}, {0.6, 0.7}});
  b.add("Tr2_s3", ComponentTag::Treatment);
  b.draw("Tr2_s3", "capacity", 90, 110);
  b.draw("Tr2_s3", "reduction_rate", 0.94, 0.95);
  b.draw_quality("Tr2_s3", "reduction_rate", {{0.3, 0.35}, {0.3, 0.4}, {0.2, 0.3}});
  // Existing process with a fixed outlet quality and strict inlet requirements.
  b.add("Tr3", ComponentTag::Treatment);
  b.draw("Tr3", "capacity", 60, 80);
  b.fix("Tr3", "reduction_rate", 0.95);
  b.fix_quality("Tr3", "fixed_exit", {40, 2, 10});
  b.fix_quality("Tr3", "upper", {450, 75, 100});
  b.add("Tr4", ComponentTag::Tank);
  b.fix("Tr4", "capacity", 400);
  b.add("App1", ComponentTag::Application);
  b.draw("App1", "capacity", 80, 100);
  b.fix_quality("App1", "upper", {120, 5, 40});
  b.add("App2", ComponentTag::Application);
  b.draw("App2", "capacity", 130, 160);
  b.fix_quality("App2", "upper", {200, 10, 60});

  b.edge("Tr1", "Tr2_s1", "setting:Setting 1");
  b.edge("Tr1", "Tr2_s2", "setting:Setting 2");
  b.edge("Tr1", "Tr2_s3", "setting:Setting 3");
  b.edge("Tr2_s1", "Tr4");
  b.edge("Tr2_s2", "Tr4");
  b.edge("Tr2_s3", "Tr4");
  b.edge("WWS3", "Tr3", "wws3:Option A");
  b.edge("Tr3", "Tr4");
  b.edge("WWS3", "Tr4", "wws3:Option B");
  b.edge("Tr4", "App1");
  b.edge("Tr4", "App2");
  b.objective(ObjectiveKind::TotalFlow, Sense::Maximize, {"T1", "T2", "WWS3"});
}

void chem_a(Builder& b, Variant variant) {
  b.pollutants({"cod", "tds", "tss"});
  b.add("FW1", ComponentTag::FreshWaterSource);
  b.draw("FW1", "capacity", 150, 200);
  b.draw_quality("FW1", "given", {{20, 30}, {300, 400}, {10, 20}});
  b.add("FW2", ComponentTag::FreshWaterSource);
  b.draw("FW2", "capacity", 150, 200);
  b.draw_quality("FW2", "given", {{10, 20}, {500, 600}, {30, 50}});
  const std::pair<double, double> tds_rates[] = {{0.4, 0.6}, {0.6, 0.8}, {0.8, 0.9}};
  for (int i = 1; i <= 3; ++i) {
    const std::string id = "Tr" + std::to_string(i);
    b.add(id, ComponentTag::Treatment);
    b.draw(id, "capacity", 80, 120);
    b.draw(id, "reduction_rate", 0.95, 0.98);
    b.draw_quality(id, "reduction_rate", {{0.5, 0.7}, tds_rates[i - 1], {0.2, 0.4}});
  }
  b.add("Tr4", ComponentTag::Treatment);
  b.draw("Tr4", "capacity", 150, 200);
  b.draw("Tr4", "reduction_rate", 0.9, 0.93);
  b.draw_quality("Tr4", "reduction_rate", {{0.55, 0.65}, {0.65, 0.75}, {0.45, 0.55}});
  b.add("Tr5", ComponentTag::Treatment);
  b.draw("Tr5", "capacity", 100, 120);
  b.draw("Tr5", "reduction_rate", 0.94, 0.96);
  b.draw_quality("Tr5", "reduction_rate", {{0.7, 0.8}, {0.8, 0.9}, {0.6, 0.7}});
  b.add("App1", ComponentTag::Application);
  b.draw("App1", "demand", 80, 100);
  b.fix_quality("App1", "upper", {15, 250, 10});
  b.add("App2", ComponentTag::Application);
  b.draw("App2", "demand", 60, 80);
  b.fix_quality("App2", "upper", {30, 400, 20});

  for (int i = 1; i <= 3; ++i) {
    const std::string id = "Tr" + std::to_string(i);
    b.edge("FW1", id);
    b.edge("FW2", id);
  }
  b.edge("Tr1", "Tr4");
  b.edge("Tr2", "Tr4");
  b.edge("Tr3", "Tr5");
  b.edge("Tr4", "App1");
  b.edge("Tr4", "App2");
  b.edge("Tr5", "App2");
  b.objective(ObjectiveKind::TotalFlow, Sense::Minimize, {"FW1", "FW2"});
  if (variant == Variant::Current) return;

  b.add("WWS1", ComponentTag::WastewaterSource);
  b.draw("WWS1", "supply", 20, 30);
  b.draw_quality("WWS1", "given", {{60, 80}, {400, 600}, {40, 60}});
  // App1's effluent, available for treatment and reuse in App2.
  b.add("App1_eff", ComponentTag::WastewaterSource);
  b.draw("App1_eff", "capacity", 55, 70);
  b.draw_quality("App1_eff", "given", {{30, 40}, {300, 400}, {15, 25}});
  b.add("Tr7v1", ComponentTag::Treatment);
  b.draw("Tr7v1", "reduction_rate", 0.93, 0.96);
  b.draw_quality("Tr7v1", "reduction_rate", {{0.5, 0.6}, {0.7, 0.8}, {0.4, 0.5}});
  b.add("Tr7v2", ComponentTag::Treatment);
  b.draw("Tr7v2", "reduction_rate", 0.82, 0.87);
  b.draw_quality("Tr7v2", "reduction_rate", {{0.25, 0.35}, {0.4, 0.5}, {0.2, 0.3}});
  b.add("D1", ComponentTag::Discharge);

  for (int i = 1; i <= 3; ++i) {
    const std::string id = "Tr" + std::to_string(i);
    b.edge("WWS1", id, "wws1:WWS1->" + id);
  }
  for (int i = 1; i <= 3; ++i) {
    const std::string id = "Tr" + std::to_string(i);
    b.edge(id, "App1", "app1:" + id + "->App1");
  }
  b.edge("App1_eff", "Tr7v1", "tr7:Tr7v1");
  b.edge("App1_eff", "Tr7v2", "tr7:Tr7v2");
  b.edge("App1_eff", "D1");
  b.edge("Tr7v1", "App2");
  b.edge("Tr7v2", "App2");
}

void chem_b(Builder& b) {
  b.pollutants({"cod", "tds", "tss"});
  b.add("WWS", ComponentTag::WastewaterSource);
  b.draw("WWS", "supply", 9, 11);
  b.draw_quality("WWS", "given", {{800, 1000}, {1500, 2000}, {300, 400}});
  struct Level {
    const char* id;
    double sr, cod, tds, tss, fixed, variable;
  };
  const Level levels[] = {{"LLT", 0.98, 0.6, 0.8, 0.5, 50, 1.0},
                          {"MLT", 0.97, 0.4, 0.6, 0.3, 100, 2.0},
                          {"HLT", 0.95, 0.2, 0.4, 0.1, 180, 3.5}};
  for (const auto& l : levels) {
    b.add(l.id, ComponentTag::Treatment);
    b.fix(l.id, "reduction_rate", l.sr);
    b.fix_quality(l.id, "reduction_rate", {l.cod, l.tds, l.tss});
    b.draw(l.id, "fixed_cost", l.fixed * 0.9, l.fixed * 1.1);
    b.draw(l.id, "variable_cost", l.variable * 0.9, l.variable * 1.1);
  }
  // Option A: municipal plant returning a fixed flow at a flat price.
  b.add("Tr1", ComponentTag::Treatment);
  b.draw("Tr1", "fixed_outflow", 38, 42);
  b.fix_quality("Tr1", "fixed_exit", {40, 600, 20});
  b.fix_quality("Tr1", "upper", {900, 2000, 400});
  b.draw("Tr1", "fixed_cost", 350, 450);
  // Option B: purification partner charging per delivered volume.
  b.add("Tr2", ComponentTag::Treatment);
  b.draw("Tr2", "reduction_rate", 3.5, 4.0);
  b.fix_quality("Tr2", "fixed_exit", {10, 200, 5});
  b.fix_quality("Tr2", "upper", {400, 1200, 150});
  b.fix("Tr2", "fixed_cost", 200);
  b.draw("Tr2", "variable_cost", 20, 30);
  // Option C: in-plant mixing with fresh water.
  b.add("Tr3", ComponentTag::Treatment);
  b.fix("Tr3", "reduction_rate", 1.0);
  b.fix_quality("Tr3", "reduction_rate", {0.9, 0.9, 0.9});
  b.fix_quality("Tr3", "upper", {150, 800, 40});
  b.draw("Tr3", "fixed_cost", 120, 180);
  b.fix("Tr3", "variable_cost", 0.5);
  b.add("FW1", ComponentTag::FreshWaterSource);
  b.fix("FW1", "capacity", 60);
  b.fix_quality("FW1", "given", {10, 300, 5});
  b.draw("FW1", "variable_cost", 1.5, 2.5);
  b.add("App1", ComponentTag::Application);
  b.draw("App1", "demand", 1.0, 1.5);
  b.fix_quality("App1", "upper", {30, 400, 10});
  b.add("App2", ComponentTag::Application);
  b.draw("App2", "demand", 30, 40);
  b.fix_quality("App2", "upper", {120, 900, 40});

  for (const auto& l : levels) b.edge("WWS", l.id, std::string("level:") + l.id);
  for (const auto& l : levels) {
    b.edge(l.id, "Tr1", "option:Option A");
    b.edge(l.id, "Tr2", "option:Option B");
    b.edge(l.id, "Tr3", "option:Option C");
  }
  b.edge("FW1", "Tr3");
  for (const char* t : {"Tr1", "Tr2", "Tr3"}) {
    b.edge(t, "App1");
    b.edge(t, "App2");
  }
  b.objective(ObjectiveKind::Cost, Sense::Minimize,
              {"LLT", "MLT", "HLT", "Tr1", "Tr2", "Tr3", "FW1"});
}

Builder build(Shape shape, Variant variant, std::uint64_t seed) {
  Builder b(seed);
  switch (shape) {
    case Shape::Refinery: refinery(b, variant); break;
    case Shape::ChemA: chem_a(b, variant); break;
    case Shape::ChemB: chem_b(b); break;
  }
  return b;
}

}  // namespace

std::string_view to_string(Shape shape) {
  switch (shape) {
    case Shape::Refinery: return "refinery";
    case Shape::ChemA: return "chem-a";
    case Shape::ChemB: return "chem-b";
  }
  return "refinery";
}

std::optional<Shape> parse_shape(std::string_view text) {
  if (text == "refinery") return Shape::Refinery;
  if (text == "chem-a") return Shape::ChemA;
  if (text == "chem-b") return Shape::ChemB;
  return std::nullopt;
}

std::string_view to_string(Variant variant) { return variant == Variant::Current ? "current" : "updated"; }

std::optional<Variant> parse_variant(std::string_view text) {
  if (text == "current") return Variant::Current;
  if (text == "updated") return Variant::Updated;
  return std::nullopt;
}

Network generate(Shape shape, Variant variant, std::uint64_t seed) {
  return std::move(build(shape, variant, seed).network());
}

TrialConfig suggested_trials(Shape shape, Variant variant, std::uint64_t seed) {
  auto b = build(shape, variant, seed);
  TrialConfig config;
  config.n_trials = 500;
  config.seed = seed;
  config.specs = b.specs();
  config.engine.discretization = 20;
  return config;
}

}  // namespace wnopt
