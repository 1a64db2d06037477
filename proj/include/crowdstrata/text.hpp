#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace crowdstrata {

/// Splits text into lines (LF or CRLF) and each line on commas. No quoting.
/// Blank lines are skipped; line numbers passed to `fn` are 1-based.
void for_each_csv_line(std::string_view text,
                       const std::function<void(std::size_t, const std::vector<std::string_view>&)>& fn);

std::int64_t parse_integer(std::string_view field, std::size_t line_no);
double parse_real(std::string_view field, std::size_t line_no);

/// Shortest decimal representation that round-trips to the same double.
std::string format_real(double value);

/// Fixed-point with `decimals` digits after the point.
std::string format_fixed(double value, int decimals);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace crowdstrata
