#include "uwbloc/csvio.hpp"

#include <cstdio>
#include <cstdlib>

#include "uwbloc/errors.hpp"

namespace uwbloc {

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_double(const std::string& field) {
  if (field.empty()) throw data_error("empty numeric field");
  char* end = nullptr;
  double v = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size())
    throw data_error("bad numeric field: " + field);
  return v;
}

long parse_long(const std::string& field) {
  if (field.empty()) throw data_error("empty integer field");
  char* end = nullptr;
  long v = std::strtol(field.c_str(), &end, 10);
  if (end != field.c_str() + field.size())
    throw data_error("bad integer field: " + field);
  return v;
}

}  // namespace uwbloc
