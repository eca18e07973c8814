#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "amodscale/errors.hpp"

namespace amodscale::csv {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
    s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

inline std::optional<double> to_double(std::string_view s) {
  double v = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<long long> to_int(std::string_view s) {
  long long v = 0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Line-oriented reader that checks the header and yields split rows.
class Reader {
 public:
  Reader(const std::filesystem::path& path, std::vector<std::string_view> expected_header)
      : path_(path), in_(path) {
    if (!in_) throw ParseError("cannot open " + path.string());
    std::string header;
    if (!std::getline(in_, header)) throw ParseError(path.string() + ": missing header row");
    const auto cols = split(header);
    if (cols.size() < expected_header.size()) throw ParseError(path.string() + ": bad header");
    for (std::size_t i = 0; i < expected_header.size(); ++i) {
      if (cols[i] != expected_header[i]) {
        throw ParseError(path.string() + ": expected column '" + std::string(expected_header[i]) +
                         "', found '" + std::string(cols[i]) + "'");
      }
    }
    width_ = expected_header.size();
  }

  /// Next non-blank row; false at end of file.
  bool next(std::vector<std::string_view>& fields) {
    while (std::getline(in_, line_)) {
      ++line_no_;
      if (trim(line_).empty()) continue;
      fields = split(line_);
      return true;
    }
    return false;
  }

  std::size_t width() const { return width_; }
  std::size_t line_number() const { return line_no_ + 1; }
  std::string where() const { return path_.string() + ":" + std::to_string(line_number()); }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::string line_;
  std::size_t line_no_ = 0;
  std::size_t width_ = 0;
};

}  // namespace amodscale::csv
