#pragma once

#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"

// Locale-independent number formatting shared by the CSV and JSON writers.

namespace jtphase::io {

inline constexpr int kSignificantDigits = 17;

// "%.17g"-style text with a '.' decimal point regardless of locale.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, kSignificantDigits);
  if (res.ec != std::errc{}) return "nan";
  return {buf, res.ptr};
}

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header) : out_(out), columns_(header.size()) {
    write_row_text(header);
  }

  void row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_double(v));
    write_row_text(cells);
  }

  void row_text(const std::vector<std::string>& cells) { write_row_text(cells); }

 private:
  void write_row_text(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw std::logic_error("CsvWriter: column count mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  std::ostream& out_;
  std::size_t columns_;
};

// Single-line JSON with floating-point numbers at 17 significant digits.
// Non-finite numbers are written as null.
inline void write_json(std::ostream& out, const nlohmann::json& j) {
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      out << '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out << ',';
        first = false;
        out << nlohmann::json(it.key()).dump() << ':';
        write_json(out, it.value());
      }
      out << '}';
      break;
    }
    case nlohmann::json::value_t::array: {
      out << '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out << ',';
        write_json(out, j[i]);
      }
      out << ']';
      break;
    }
    case nlohmann::json::value_t::number_float: {
      const double v = j.get<double>();
      out << (std::isfinite(v) ? format_double(v) : std::string("null"));
      break;
    }
    default:
      out << j.dump();
  }
}

inline std::string to_json_line(const nlohmann::json& j) {
  std::ostringstream s;
  write_json(s, j);
  return s.str();
}

}  // namespace jtphase::io
