#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <string>
#include <string_view>

#include "coarse/error.hpp"

namespace coarse {

using Rational = mpq_class;

inline Rational make_rational(long num, long den = 1) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

// "p/q" in lowest terms, "p" when q == 1.
inline std::string to_string(const Rational& r) { return r.get_str(); }

// Accepts "p", "p/q" and exact decimals "d.ddd".
inline Rational parse_rational(std::string_view text) {
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string digits(text.substr(0, dot));
    std::string frac(text.substr(dot + 1));
    const bool neg = !digits.empty() && (digits[0] == '-' || digits[0] == '+');
    std::string whole = neg ? digits.substr(1) : digits;
    auto all_digits = [](const std::string& s) {
      return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
    };
    if ((whole.empty() && frac.empty()) || !all_digits(whole) || !all_digits(frac)) {
      throw FormatError("not a rational number: '" + std::string(text) + "'");
    }
    Rational r(mpz_class((whole.empty() ? "0" : whole) + frac, 10), mpz_class("1" + std::string(frac.size(), '0'), 10));
    r.canonicalize();
    return digits[0] == '-' ? Rational(-r) : r;
  }
  Rational r;
  if (text.empty() || r.set_str(std::string(text), 10) != 0) {
    throw FormatError("not a rational number: '" + std::string(text) + "'");
  }
  if (r.get_den() == 0) throw FormatError("zero denominator: '" + std::string(text) + "'");
  r.canonicalize();
  return r;
}

// Exact value of a finite double.
inline Rational from_double(double v) {
  Rational r(v);
  r.canonicalize();
  return r;
}

}  // namespace coarse
