#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "wnopt/network.hpp"

namespace wnopt {

using Json = nlohmann::ordered_json;

// Canonical instance document: top-level keys pollutants, components, edges,
// objective. Absent attributes are omitted. dump(parse(dump(n))) == dump(n).
Json network_to_json(const Network& net);
Network network_from_json(const Json& doc);

std::string dump_network(const Network& net);
Network parse_network(std::string_view text);

Json objective_to_json(const Objective& obj);
Objective objective_from_json(const Json& doc);

Json report_to_json(const ValidationReport& report);

// Shared canonical text rendering: two-space indent and a trailing newline.
std::string dump_canonical(const Json& doc);
Json parse_json(std::string_view text);

std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

// Field accessors that raise Error(ParseError) naming the offending key.
namespace json_field {
std::optional<double> number(const Json& obj, std::string_view key);
double required_number(const Json& obj, std::string_view key);
std::string required_string(const Json& obj, std::string_view key);
std::optional<std::string> string(const Json& obj, std::string_view key);
}  // namespace json_field

}  // namespace wnopt
