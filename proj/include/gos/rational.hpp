#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gos {

// Exact rational on int64 with __int128 cross multiplication for comparisons.
// Delay sums stay below ~2^40, so normalized values never approach overflow.
struct Rational {
  int64_t num = 0;
  int64_t den = 1;

  constexpr Rational() = default;
  constexpr Rational(int64_t n) : num(n), den(1) {}
  Rational(int64_t n, int64_t d) : num(n), den(d) {
    if (den == 0) throw std::invalid_argument("Rational: zero denominator");
    normalize();
  }

  void normalize() {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    if (num == 0) den = 1;
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return Rational(a.num * b.den + b.num * a.den, a.den * b.den);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return Rational(a.num * b.den - b.num * a.den, a.den * b.den);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return Rational(a.num * b.num, a.den * b.den);
  }
  friend Rational operator*(const Rational& a, int64_t k) { return Rational(a.num * k, a.den); }
  friend Rational operator*(int64_t k, const Rational& a) { return a * k; }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num == 0) throw std::invalid_argument("Rational: divide by zero");
    return Rational(a.num * b.den, a.den * b.num);
  }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
  }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
  friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

  bool is_integer() const { return den == 1; }

  // Largest integer strictly below this value.
  int64_t floor_strict_below() const {
    if (is_integer()) return num - 1;
    // floor for positive, den > 1
    int64_t q = num / den;
    if (num < 0 && num % den != 0) --q;
    return q;
  }

  std::string str() const {
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
  }

  // Parses "3", "1.5", "0.0027" exactly (decimal expansion over a power of 10).
  static Rational from_decimal(std::string_view s);
};

inline Rational Rational::from_decimal(std::string_view s) {
  if (s.empty()) throw std::invalid_argument("Rational: empty string");
  bool neg = false;
  size_t i = 0;
  if (s[0] == '+' || s[0] == '-') {
    neg = s[0] == '-';
    i = 1;
  }
  int64_t num = 0;
  int64_t den = 1;
  bool seen_digit = false;
  bool after_point = false;
  for (; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '.') {
      if (after_point) throw std::invalid_argument("Rational: bad decimal");
      after_point = true;
      continue;
    }
    if (c < '0' || c > '9') throw std::invalid_argument("Rational: bad decimal");
    seen_digit = true;
    num = num * 10 + (c - '0');
    if (after_point) den *= 10;
    if (num > (int64_t{1} << 56) || den > (int64_t{1} << 56))
      throw std::invalid_argument("Rational: decimal too long");
  }
  if (!seen_digit) throw std::invalid_argument("Rational: bad decimal");
  return Rational(neg ? -num : num, den);
}

}  // namespace gos
