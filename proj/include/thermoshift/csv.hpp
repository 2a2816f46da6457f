#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <filesystem>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "thermoshift/error.hpp"
#include "thermoshift/shift.hpp"

namespace thermoshift::csv {

/// Shortest text that parses back to the same double; "inf", "-inf", "nan".
inline std::string format(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw Error("cannot format a double");
  return std::string(buf, end);
}

inline std::string format(std::int64_t v) { return std::to_string(v); }
inline std::string format(int v) { return std::to_string(v); }
inline std::string format(std::size_t v) { return std::to_string(v); }
inline std::string format(bool v) { return v ? "true" : "false"; }
inline std::string format(std::string_view v) { return std::string(v); }
inline std::string format(const char* v) { return std::string(v); }

/// Symbols joined by '-'.
inline std::string format_word(WordView w) {
  std::string out;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (k) out += '-';
    out += std::to_string(w[k]);
  }
  return out;
}

class Writer {
 public:
  Writer(const std::filesystem::path& path, std::vector<std::string> header)
      : out_(path, std::ios::binary), columns_(header.size()), path_(path) {
    if (!out_) throw Error("cannot open " + path.string() + " for writing");
    write_line(header);
  }

  template <class... Cells>
  void row(const Cells&... cells) {
    static_assert(sizeof...(Cells) > 0);
    std::vector<std::string> line{format(cells)...};
    if (line.size() != columns_) throw Error("row width mismatch in " + path_.string());
    write_line(line);
  }

 private:
  void write_line(const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) out_ << ',';
      out_ << cells[k];
    }
    out_ << '\n';
  }

  std::ofstream out_;
  std::size_t columns_;
  std::filesystem::path path_;
};

}  // namespace thermoshift::csv
