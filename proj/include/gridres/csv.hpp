#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gridres::csv {

/// One parsed data row with its 1-based source line for diagnostics.
struct Row {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

/// Splits comma-separated text into rows. Blank lines and lines starting with
/// '#' are skipped; fields are whitespace-trimmed. When `header` is non-empty
/// the first data row must equal it (case-insensitive) and is dropped.
std::vector<Row> parse(std::string_view text, const std::vector<std::string>& header = {},
                       std::string_view what = "csv");

double to_double(const std::string& field, std::size_t line, std::string_view what);
long long to_int(const std::string& field, std::size_t line, std::string_view what);

/// Shortest round-trip decimal form of a double.
std::string format(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace gridres::csv
