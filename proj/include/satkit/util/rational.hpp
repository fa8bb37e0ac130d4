#ifndef SATKIT_UTIL_RATIONAL_HPP
#define SATKIT_UTIL_RATIONAL_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>

namespace satkit {

using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline BigInt rat_num(const Rat& r) { return boost::multiprecision::numerator(r); }
inline BigInt rat_den(const Rat& r) { return boost::multiprecision::denominator(r); }

inline bool is_integer(const Rat& r) { return rat_den(r) == 1; }

inline BigInt floor_div(const BigInt& a, const BigInt& b) {
  BigInt q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

inline BigInt rat_floor(const Rat& r) { return floor_div(rat_num(r), rat_den(r)); }

inline BigInt rat_ceil(const Rat& r) {
  BigInt f = rat_floor(r);
  return (Rat(f) == r) ? f : f + 1;
}

/// Parses "12", "-3.25", "7/2" into an exact rational.
inline std::optional<Rat> parse_rational(const std::string& s) {
  if (s.empty()) return std::nullopt;
  size_t i = 0;
  bool neg = false;
  if (s[i] == '+' || s[i] == '-') {
    neg = (s[i] == '-');
    ++i;
  }
  BigInt int_part = 0, frac_part = 0, frac_scale = 1, den = 1;
  bool any_digit = false, in_frac = false, in_den = false;
  BigInt den_val = 0;
  bool den_digit = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (c >= '0' && c <= '9') {
      if (in_den) {
        den_val = den_val * 10 + (c - '0');
        den_digit = true;
      } else if (in_frac) {
        frac_part = frac_part * 10 + (c - '0');
        frac_scale *= 10;
      } else {
        int_part = int_part * 10 + (c - '0');
      }
      any_digit = true;
    } else if (c == '.' && !in_frac && !in_den) {
      in_frac = true;
    } else if (c == '/' && !in_den && !in_frac) {
      in_den = true;
    } else {
      return std::nullopt;
    }
  }
  if (!any_digit) return std::nullopt;
  if (in_den) {
    if (!den_digit || den_val == 0) return std::nullopt;
    den = den_val;
  }
  Rat v = Rat(int_part) + Rat(frac_part, frac_scale);
  v /= Rat(den);
  return neg ? -v : v;
}

/// Exact decimal expansion when the denominator is of the form 2^a * 5^b,
/// otherwise "p/q".
inline std::string rat_to_string(const Rat& r) {
  BigInt num = rat_num(r), den = rat_den(r);
  if (den == 1) return num.str();
  BigInt d = den;
  int twos = 0, fives = 0;
  while (d % 2 == 0) { d /= 2; ++twos; }
  while (d % 5 == 0) { d /= 5; ++fives; }
  if (d != 1) return num.str() + "/" + den.str();
  int digits = std::max(twos, fives);
  BigInt scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  BigInt scaled = num * (scale / den);
  bool neg = scaled < 0;
  if (neg) scaled = -scaled;
  std::string raw = scaled.str();
  if (static_cast<int>(raw.size()) <= digits) raw.insert(0, digits + 1 - raw.size(), '0');
  raw.insert(raw.size() - digits, ".");
  while (raw.back() == '0') raw.pop_back();
  if (raw.back() == '.') raw.pop_back();
  return (neg ? "-" : "") + raw;
}

inline double rat_to_double(const Rat& r) { return static_cast<double>(r); }

}  // namespace satkit

#endif  // SATKIT_UTIL_RATIONAL_HPP
