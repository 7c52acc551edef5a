#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace spr {

/// Shortest round-trip decimal form, independent of the C locale.
std::string format_double(double value);

/// Empty string for an absent value.
std::string format_optional(const std::optional<double>& value);

/// Locale-independent parse of a full field; throws InvalidParameter otherwise.
double parse_double(std::string_view text);

}  // namespace spr
