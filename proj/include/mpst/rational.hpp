#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace mpst {

// Exact rational arithmetic. Decimal literals convert exactly (0.6 == 3/5);
// nothing in the library ever rounds.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline Rational make_rational(std::int64_t num, std::int64_t den) {
  return Rational(BigInt(num), BigInt(den));
}

// "num/den" with den omitted when 1. This is the canonical textual form used
// by the printers and the JSON reports.
std::string rational_string(const Rational& r);

// Decimal rendering for human-facing reports, not used in comparisons.
double rational_double(const Rational& r);

// Parses "3/5", "0.6", "1", ".5". Returns nullopt on malformed input.
std::optional<Rational> parse_rational(const std::string& text);

inline bool in_unit_interval(const Rational& r) {
  return r >= 0 && r <= 1;
}

}  // namespace mpst
