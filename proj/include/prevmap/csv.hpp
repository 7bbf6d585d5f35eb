#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace prevmap {

/// Shortest-safe decimal form with 17 significant digits (round-trips).
std::string format_real(double value);

/// Splits one CSV line on commas and trims surrounding whitespace. Quoting is
/// not supported.
std::vector<std::string> split_csv_line(const std::string& line);

/// Reads all non-empty, non-comment ('#') rows; the first one goes to
/// `header` when has_header is set.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// 1-based source line of each row, for error messages.
  std::vector<std::size_t> lines;
};
CsvTable read_csv(std::istream& in, bool has_header);

}  // namespace prevmap
