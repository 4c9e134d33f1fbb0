#pragma once

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <string>

#include "archopt/errors.hpp"

// Human-unit parsing for the CLI boundary. Decimal SI only (G = 1e9);
// binary units (GiB, KiB, ...) are rejected with a hint. The core library
// itself works in plain FLOP/s, bytes/s, bytes, and seconds.

namespace archopt::units {

namespace detail {

inline double si_prefix(char c) {
  switch (std::tolower(static_cast<unsigned char>(c))) {
    case 'k': return 1e3;
    case 'm': return 1e6;
    case 'g': return 1e9;
    case 't': return 1e12;
    case 'p': return 1e15;
    default: return 0.0;
  }
}

inline std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Splits "12.5GB/s" into the number and the unit suffix.
inline void split(const std::string& text, double& number, std::string& suffix) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  if (s.empty()) throw ParseError("empty quantity");
  const char* begin = s.c_str();
  char* end = nullptr;
  number = std::strtod(begin, &end);
  if (end == begin || !std::isfinite(number))
    throw ParseError("cannot parse number in quantity: " + text);
  suffix = lower(std::string(end));
  if (suffix.size() >= 2 && suffix[1] == 'i')
    throw ParseError("binary units are not supported; use decimal SI (e.g. GB = 1e9 bytes): " +
                     text);
}

}  // namespace detail

// "10TOPS" / "10TFLOPS" / "1e13" -> FLOP/s.
inline double parse_flops(const std::string& text) {
  double n;
  std::string u;
  detail::split(text, n, u);
  if (u.empty()) return n;
  for (const char* base : {"ops", "flops", "flop/s"}) {
    const std::string b(base);
    if (u == b) return n;
    if (u.size() == b.size() + 1 && u.compare(1, b.size(), b) == 0) {
      const double p = detail::si_prefix(u[0]);
      if (p > 0.0) return n * p;
    }
  }
  throw ParseError("cannot parse compute rate: " + text + " (expected e.g. 10TOPS, 5TFLOPS)");
}

// "4GB" / "4e9" -> bytes.
inline double parse_bytes(const std::string& text) {
  double n;
  std::string u;
  detail::split(text, n, u);
  if (u.empty()) return n;
  if (u == "b") return n;
  if (u.size() == 2 && u[1] == 'b') {
    const double p = detail::si_prefix(u[0]);
    if (p > 0.0) return n * p;
  }
  throw ParseError("cannot parse byte size: " + text + " (expected e.g. 4GB, 512MB)");
}

// "50GB/s" / "5e10" -> bytes per second.
inline double parse_bandwidth(const std::string& text) {
  double n;
  std::string u;
  detail::split(text, n, u);
  if (u.empty()) return n;
  if (u.size() >= 2 && u.compare(u.size() - 2, 2, "/s") == 0) {
    const std::string b = u.substr(0, u.size() - 2);
    if (b == "b") return n;
    if (b.size() == 2 && b[1] == 'b') {
      const double p = detail::si_prefix(b[0]);
      if (p > 0.0) return n * p;
    }
  }
  throw ParseError("cannot parse bandwidth: " + text + " (expected e.g. 50GB/s)");
}

// "100ms" / "0.1s" / "0.1" -> seconds.
inline double parse_seconds(const std::string& text) {
  double n;
  std::string u;
  detail::split(text, n, u);
  if (u.empty() || u == "s") return n;
  if (u == "ms") return n * 1e-3;
  if (u == "us") return n * 1e-6;
  if (u == "ns") return n * 1e-9;
  if (u == "min") return n * 60.0;
  throw ParseError("cannot parse duration: " + text + " (expected e.g. 100ms, 0.1s)");
}

}  // namespace archopt::units
