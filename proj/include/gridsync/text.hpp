#pragma once

// Small parsing/formatting helpers shared by the CSV and config readers.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gridsync {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

/// Whole-string parse; nullopt on trailing junk or empty input.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);
std::optional<unsigned long long> parse_uint(std::string_view s);

/// Fixed 9 significant digits, locale independent. Used by every CSV writer.
std::string format_decimal(double v);

/// Shortest representation that round-trips exactly (for config files).
std::string format_exact(double v);

}  // namespace gridsync
