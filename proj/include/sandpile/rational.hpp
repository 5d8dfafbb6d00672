#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "error.hpp"

namespace sandpile {

// Expression templates off: values behave like plain arithmetic types (std::max etc.).
using BigInt = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>, boost::multiprecision::et_off>;
using Rational =
    boost::multiprecision::number<boost::multiprecision::cpp_rational_backend, boost::multiprecision::et_off>;

inline BigInt numer(const Rational& q) { return boost::multiprecision::numerator(q); }
inline BigInt denom(const Rational& q) { return boost::multiprecision::denominator(q); }

inline BigInt floor_int(const Rational& q) {
  BigInt n = numer(q), d = denom(q);
  BigInt f = n / d;  // truncates toward zero
  if (n < 0 && f * d != n) --f;
  return f;
}

inline BigInt ceil_int(const Rational& q) { return -floor_int(-q); }

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

// Accepts "12", "-3/4", "7.25", "1e-3", "2.5E2".
inline Rational parse_rational(std::string_view text) {
  auto fail = [&]() -> Rational {
    throw ParseError("not a rational number: '" + std::string(text) + "'");
  };
  if (text.empty()) return fail();
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Rational a = parse_rational(text.substr(0, slash));
    Rational b = parse_rational(text.substr(slash + 1));
    if (denom(a) != 1 || denom(b) != 1 || b == 0) return fail();
    return a / b;
  }
  std::size_t i = 0;
  bool negative = false;
  if (text[i] == '+' || text[i] == '-') negative = text[i++] == '-';
  BigInt digits = 0;
  long scale = 0;
  bool any = false, dot = false;
  for (; i < text.size(); ++i) {
    char ch = text[i];
    if (ch >= '0' && ch <= '9') {
      digits = digits * 10 + (ch - '0');
      any = true;
      if (dot) --scale;
    } else if (ch == '.' && !dot) {
      dot = true;
    } else {
      break;
    }
  }
  if (!any) return fail();
  if (i < text.size()) {
    if (text[i] != 'e' && text[i] != 'E') return fail();
    std::string_view rest = text.substr(i + 1);
    if (!rest.empty() && rest.front() == '+') rest.remove_prefix(1);
    long exponent = 0;
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), exponent);
    if (ec != std::errc() || ptr != rest.data() + rest.size() || exponent > 4000 || exponent < -4000)
      return fail();
    scale += exponent;
  }
  BigInt ten_pow = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(scale < 0 ? -scale : scale));
  Rational value = scale < 0 ? Rational(digits, ten_pow) : Rational(digits * ten_pow);
  return negative ? Rational(-value) : value;
}

// Exact text: integers and terminating decimals print as decimals, anything
// else as "p/q". parse_rational(format_rational(q)) == q always.
inline std::string format_rational(const Rational& q) {
  BigInt n = numer(q), d = denom(q);
  if (d == 1) return n.str();
  BigInt rest = d;
  unsigned twos = 0, fives = 0;
  while (rest % 2 == 0) rest /= 2, ++twos;
  while (rest % 5 == 0) rest /= 5, ++fives;
  if (rest != 1) return n.str() + "/" + d.str();
  unsigned places = twos > fives ? twos : fives;
  BigInt scaled = abs(n) * boost::multiprecision::pow(BigInt(10), places) / d;
  std::string s = scaled.str();
  if (s.size() <= places) s.insert(0, places - s.size() + 1, '0');
  s.insert(s.size() - places, ".");
  return (n < 0 ? "-" : "") + s;
}

inline std::optional<Rational> exact_sqrt(const Rational& q) {
  if (q < 0) return std::nullopt;
  BigInt n = numer(q), d = denom(q);
  BigInt sn = boost::multiprecision::sqrt(n), sd = boost::multiprecision::sqrt(d);
  if (sn * sn != n || sd * sd != d) return std::nullopt;
  return Rational(sn, sd);
}

// Dyadic bounds lower <= sqrt(q) <= upper with gap at most 2^-bits.
inline Rational sqrt_lower(const Rational& q, unsigned bits = 64) {
  if (auto e = exact_sqrt(q)) return *e;
  BigInt scale = BigInt(1) << (2 * bits);
  BigInt s = boost::multiprecision::sqrt(floor_int(q * scale));
  return Rational(s, BigInt(1) << bits);
}

inline Rational sqrt_upper(const Rational& q, unsigned bits = 64) {
  if (auto e = exact_sqrt(q)) return *e;
  return sqrt_lower(q, bits) + Rational(1, BigInt(1) << bits);
}

// Nearest dyadic rational with the given number of fractional bits.
inline Rational dyadic(double x, unsigned bits = 30) {
  double scaled = std::ldexp(x, static_cast<int>(bits));
  return Rational(BigInt(static_cast<long long>(std::llround(scaled))), BigInt(1) << bits);
}

}  // namespace sandpile
