#pragma once

#include <string>
#include <vector>

namespace uwbloc {

// Shortest decimal form that round-trips a double exactly.
std::string format_full(double v);

// Compact form for report files.
std::string format_short(double v);

std::vector<std::string> split_csv_line(const std::string& line);

// strtod with full-string validation; throws data_error.
double parse_double(const std::string& field);
long parse_long(const std::string& field);

}  // namespace uwbloc
