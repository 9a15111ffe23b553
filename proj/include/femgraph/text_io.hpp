#pragma once

#include <charconv>
#include <istream>
#include <string>
#include <string_view>

#include "femgraph/error.hpp"

namespace femgraph {

// Shortest representation that parses back to the identical double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw DataError("not a number: '" + std::string(s) + "'");
  }
  return v;
}

// Reads the next whitespace-delimited token; throws DataError at end of input.
inline std::string next_token(std::istream& in, const char* what) {
  std::string tok;
  if (!(in >> tok)) throw DataError(std::string("unexpected end of input reading ") + what);
  return tok;
}

inline double read_double(std::istream& in, const char* what) {
  return parse_double(next_token(in, what));
}

inline long long read_int(std::istream& in, const char* what) {
  const std::string tok = next_token(in, what);
  long long v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw DataError(std::string("expected integer for ") + what + ", got '" + tok + "'");
  }
  return v;
}

}  // namespace femgraph
