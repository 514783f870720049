#pragma once

#include <string>
#include <vector>

namespace gpelab::cli {

/// Shortest decimal string that round-trips the double exactly
/// (locale-independent).
std::string format_double(double x);

/// Scientific notation with 17 significant digits (snapshot precision;
/// also round-trips exactly).
std::string format_double_17(double x);

/// strtod with full-string validation; throws std::invalid_argument.
double parse_double(const std::string& s);

/// Splits one CSV line at commas (no quoting; the formats here never
/// produce quoted fields).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace gpelab::cli
