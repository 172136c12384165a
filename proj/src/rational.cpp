#include "mpst/rational.hpp"

#include <cctype>

namespace mpst {

std::string rational_string(const Rational& r) {
  std::string s = numerator(r).str();
  if (denominator(r) != 1) {
    s += "/" + denominator(r).str();
  }
  return s;
}

double rational_double(const Rational& r) {
  return static_cast<double>(r);
}

std::optional<Rational> parse_rational(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::size_t i = 0;
  bool neg = false;
  if (text[i] == '-' || text[i] == '+') {
    neg = text[i] == '-';
    ++i;
  }
  auto digits = [&](BigInt& out) {
    std::size_t start = i;
    out = 0;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      out = out * 10 + (text[i] - '0');
      ++i;
    }
    return i > start;
  };
  BigInt ipart = 0;
  bool have_int = digits(ipart);
  Rational value(ipart);
  if (i < text.size() && text[i] == '.') {
    ++i;
    std::size_t start = i;
    BigInt frac = 0;
    if (!digits(frac)) return std::nullopt;
    BigInt scale = 1;
    for (std::size_t k = start; k < i; ++k) scale *= 10;
    value += Rational(frac, scale);
  } else if (i < text.size() && text[i] == '/') {
    if (!have_int) return std::nullopt;
    ++i;
    BigInt den = 0;
    if (!digits(den) || den == 0) return std::nullopt;
    value = Rational(ipart, den);
  } else if (!have_int) {
    return std::nullopt;
  }
  if (i != text.size()) return std::nullopt;
  return neg ? Rational(-value) : value;
}

}  // namespace mpst
