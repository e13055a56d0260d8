#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "wnopt/network.hpp"
#include "wnopt/scenario.hpp"

namespace wnopt {

// Synthetic instances laid out like the three industrial case studies:
// an oil refinery, a chemical plant minimizing fresh water intake (chem-a)
// and a chemical plant choosing external treatment partners by cost (chem-b).
// Attribute values are drawn from plausible ranges; they are not plant data.
enum class Shape { Refinery, ChemA, ChemB };
enum class Variant { Current, Updated };

std::string_view to_string(Shape shape);
std::optional<Shape> parse_shape(std::string_view text);
std::string_view to_string(Variant variant);
std::optional<Variant> parse_variant(std::string_view text);

// Same (shape, variant, seed) gives the same network. chem-b has a single
// design network; both variants return it.
Network generate(Shape shape, Variant variant, std::uint64_t seed);

// Trial configuration drawing the shape's uncertain attributes around the
// generated values (n_trials 500, K 20).
TrialConfig suggested_trials(Shape shape, Variant variant, std::uint64_t seed);

}  // namespace wnopt
