#include "wnopt/network_io.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <system_error>

#include "wnopt/error.hpp"

namespace wnopt {

namespace json_field {

std::optional<double> number(const Json& obj, std::string_view key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) throw Error(ErrorCode::ParseError, "field '" + std::string(key) + "' must be a number");
  return it->get<double>();
}

double required_number(const Json& obj, std::string_view key) {
  auto v = number(obj, key);
  if (!v) throw Error(ErrorCode::ParseError, "missing field '" + std::string(key) + "'");
  return *v;
}

std::optional<std::string> string(const Json& obj, std::string_view key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw Error(ErrorCode::ParseError, "field '" + std::string(key) + "' must be a string");
  return it->get<std::string>();
}

std::string required_string(const Json& obj, std::string_view key) {
  auto v = string(obj, key);
  if (!v) throw Error(ErrorCode::ParseError, "missing field '" + std::string(key) + "'");
  return *v;
}

}  // namespace json_field

namespace {

using json_field::number;
using json_field::required_string;

void put(Json& obj, const char* key, const std::optional<double>& value) {
  if (value) obj[key] = *value;
}

const Json& require_array(const Json& doc, const char* key) {
  static const Json empty = Json::array();
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return empty;
  if (!it->is_array()) throw Error(ErrorCode::ParseError, std::string("'") + key + "' must be an array");
  return *it;
}

void require_object(const Json& value, const std::string& what) {
  if (!value.is_object()) throw Error(ErrorCode::ParseError, what + " must be an object");
}

}  // namespace

Json objective_to_json(const Objective& obj) {
  Json out;
  out["kind"] = to_string(obj.kind);
  out["sense"] = to_string(obj.sense);
  out["scope"] = obj.scope;
  return out;
}

Objective objective_from_json(const Json& doc) {
  require_object(doc, "objective");
  Objective obj;
  const auto kind = required_string(doc, "kind");
  const auto sense = required_string(doc, "sense");
  auto k = parse_objective_kind(kind);
  auto s = parse_sense(sense);
  if (!k) throw Error(ErrorCode::ParseError, "unknown objective kind '" + kind + "'");
  if (!s) throw Error(ErrorCode::ParseError, "unknown objective sense '" + sense + "'");
  obj.kind = *k;
  obj.sense = *s;
  for (const auto& id : require_array(doc, "scope")) {
    if (!id.is_string()) throw Error(ErrorCode::ParseError, "objective scope entries must be strings");
    obj.scope.push_back(id.get<std::string>());
  }
  return obj;
}

Json network_to_json(const Network& net) {
  Json doc;
  Json pollutants = Json::array();
  for (const auto& p : net.pollutants) {
    Json j;
    j["id"] = p.id;
    j["name"] = p.name;
    j["unit"] = p.unit;
    pollutants.push_back(std::move(j));
  }
  doc["pollutants"] = std::move(pollutants);

  Json components = Json::array();
  for (const auto& c : net.components) {
    Json j;
    j["id"] = c.id;
    j["tag"] = to_string(c.tag);
    const auto& a = c.attrs;
    put(j, "capacity", a.capacity);
    put(j, "supply", a.supply);
    put(j, "demand", a.demand);
    put(j, "reduction_rate", a.reduction_rate);
    put(j, "fixed_outflow", a.fixed_outflow);
    if (!a.quality.empty()) {
      Json quality = Json::object();
      for (const auto& [pid, q] : a.quality) {
        Json qj = Json::object();
        put(qj, "given", q.given);
        put(qj, "reduction_rate", q.reduction_rate);
        put(qj, "fixed_exit", q.fixed_exit);
        put(qj, "lower", q.lower);
        put(qj, "upper", q.upper);
        quality[pid] = std::move(qj);
      }
      j["quality"] = std::move(quality);
    }
    put(j, "fixed_cost", a.fixed_cost);
    put(j, "variable_cost", a.variable_cost);
    put(j, "fixed_energy", a.fixed_energy);
    put(j, "variable_energy", a.variable_energy);
    components.push_back(std::move(j));
  }
  doc["components"] = std::move(components);

  Json edges = Json::array();
  for (const auto& e : net.edges) {
    Json j;
    j["from"] = e.from;
    j["to"] = e.to;
    put(j, "capacity", e.capacity);
    if (e.option_group) j["option_group"] = *e.option_group;
    edges.push_back(std::move(j));
  }
  doc["edges"] = std::move(edges);

  if (net.objective) doc["objective"] = objective_to_json(*net.objective);
  return doc;
}

Network network_from_json(const Json& doc) {
  require_object(doc, "network document");
  Network net;
  for (const auto& pj : require_array(doc, "pollutants")) {
    require_object(pj, "pollutant");
    Pollutant p;
    p.id = required_string(pj, "id");
    p.name = json_field::string(pj, "name").value_or(p.id);
    p.unit = json_field::string(pj, "unit").value_or("");
    net.pollutants.push_back(std::move(p));
  }
  for (const auto& cj : require_array(doc, "components")) {
    require_object(cj, "component");
    Component c;
    c.id = required_string(cj, "id");
    const auto tag = required_string(cj, "tag");
    auto parsed = parse_component_tag(tag);
    if (!parsed) throw Error(ErrorCode::ParseError, "component '" + c.id + "' has unknown tag '" + tag + "'");
    c.tag = *parsed;
    auto& a = c.attrs;
    a.capacity = number(cj, "capacity");
    a.supply = number(cj, "supply");
    a.demand = number(cj, "demand");
    a.reduction_rate = number(cj, "reduction_rate");
    a.fixed_outflow = number(cj, "fixed_outflow");
    if (auto it = cj.find("quality"); it != cj.end() && !it->is_null()) {
      require_object(*it, "quality of '" + c.id + "'");
      for (const auto& [pid, qj] : it->items()) {
        require_object(qj, "quality entry '" + pid + "'");
        QualityAttrs q;
        q.given = number(qj, "given");
        q.reduction_rate = number(qj, "reduction_rate");
        q.fixed_exit = number(qj, "fixed_exit");
        q.lower = number(qj, "lower");
        q.upper = number(qj, "upper");
        a.quality[pid] = q;
      }
    }
    a.fixed_cost = number(cj, "fixed_cost");
    a.variable_cost = number(cj, "variable_cost");
    a.fixed_energy = number(cj, "fixed_energy");
    a.variable_energy = number(cj, "variable_energy");
    net.components.push_back(std::move(c));
  }
  for (const auto& ej : require_array(doc, "edges")) {
    require_object(ej, "edge");
    Edge e;
    e.from = required_string(ej, "from");
    e.to = required_string(ej, "to");
    e.capacity = number(ej, "capacity");
    e.option_group = json_field::string(ej, "option_group");
    net.edges.push_back(std::move(e));
  }
  if (auto it = doc.find("objective"); it != doc.end() && !it->is_null()) {
    net.objective = objective_from_json(*it);
  }
  return net;
}

std::string dump_canonical(const Json& doc) { return doc.dump(2) + "\n"; }

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

std::string dump_network(const Network& net) { return dump_canonical(network_to_json(net)); }

Network parse_network(std::string_view text) { return network_from_json(parse_json(text)); }

Json report_to_json(const ValidationReport& report) {
  auto list = [](const std::vector<Violation>& items) {
    Json arr = Json::array();
    for (const auto& v : items) {
      Json j;
      j["code"] = v.code;
      j["element"] = v.element;
      j["message"] = v.message;
      arr.push_back(std::move(j));
    }
    return arr;
  };
  Json out;
  out["ok"] = report.ok();
  out["violations"] = list(report.violations);
  out["warnings"] = list(report.warnings);
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  static std::atomic<unsigned long> counter{0};
  auto tmp = path;
  tmp += ".tmp" + std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw Error(ErrorCode::Io, "short write to " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::Io, "cannot rename into " + path.string());
  }
}

}  // namespace wnopt
