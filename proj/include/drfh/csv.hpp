#ifndef DRFH_CSV_HPP
#define DRFH_CSV_HPP

#include <charconv>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace drfh::csv {

// Shortest round-tripping decimal form; locale independent.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format_int(std::int64_t v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view field, const std::string& context) {
  if (field == "inf" || field == "+inf" || field == "infinity") {
    return std::numeric_limits<double>::infinity();
  }
  double out = 0.0;
  auto res = std::from_chars(field.data(), field.data() + field.size(), out);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
    throw std::invalid_argument(context + ": bad number '" + std::string(field) + "'");
  }
  return out;
}

inline std::int64_t parse_int(std::string_view field, const std::string& context) {
  std::int64_t out = 0;
  auto res = std::from_chars(field.data(), field.data() + field.size(), out);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
    throw std::invalid_argument(context + ": bad integer '" + std::string(field) + "'");
  }
  return out;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

}  // namespace drfh::csv

#endif  // DRFH_CSV_HPP
