#pragma once

// CSV output with a versioned schema line and round-trip precision.

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "errors.hpp"

namespace pendulon {

/// Shortest-safe text for a double: %.17g always round-trips.
inline std::string fmt_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& schema,
            const std::vector<std::string>& columns)
      : out_(path, std::ios::binary), width_(columns.size()) {
    if (!out_) throw DomainError("cannot write " + path);
    out_ << "# schema: " << schema << " v1\n";
    for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << '\n';
  }

  void row(std::initializer_list<double> values) { row(std::vector<double>(values)); }

  void row(const std::vector<double>& values) {
    if (values.size() != width_) throw DomainError("csv row width does not match the header");
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << fmt_double(values[i]);
    out_ << '\n';
  }

 private:
  std::ofstream out_;
  std::size_t width_;
};

}  // namespace pendulon
