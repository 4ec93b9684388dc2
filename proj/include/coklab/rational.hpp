#pragma once

#include <cstdint>
#include <string>

#include "coklab/common.hpp"

namespace coklab {

// Exact rational on __int128. Denominators in this project stay tiny
// (products of entry-probability denominators), so 128 bits is ample;
// overflow throws rather than wrapping.
struct Rational {
  __int128 num = 0;
  __int128 den = 1;  // > 0

  Rational() = default;
  Rational(std::int64_t n) : num(n), den(1) {}
  Rational(std::int64_t n, std::int64_t d) : num(n), den(d) { normalize(); }

  static Rational make(__int128 n, __int128 d) {
    Rational r;
    r.num = n;
    r.den = d;
    r.normalize();
    return r;
  }

  void normalize() {
    if (den == 0) fail(Errc::Overflow, "rational with zero denominator");
    if (den < 0) { den = -den; num = -num; }
    __int128 a = num < 0 ? -num : num, b = den;
    while (b) { __int128 t = a % b; a = b; b = t; }
    if (a > 1) { num /= a; den /= a; }
  }

  friend Rational operator+(const Rational& x, const Rational& y) {
    return make(x.num * y.den + y.num * x.den, x.den * y.den);
  }
  friend Rational operator-(const Rational& x, const Rational& y) {
    return make(x.num * y.den - y.num * x.den, x.den * y.den);
  }
  friend Rational operator*(const Rational& x, const Rational& y) {
    return make(x.num * y.num, x.den * y.den);
  }
  friend Rational operator/(const Rational& x, const Rational& y) {
    if (y.num == 0) fail(Errc::Overflow, "rational division by zero");
    return make(x.num * y.den, x.den * y.num);
  }
  Rational& operator+=(const Rational& y) { *this = *this + y; return *this; }
  Rational& operator*=(const Rational& y) { *this = *this * y; return *this; }

  friend bool operator==(const Rational& x, const Rational& y) {
    return x.num == y.num && x.den == y.den;
  }
  friend bool operator!=(const Rational& x, const Rational& y) { return !(x == y); }
  friend bool operator<(const Rational& x, const Rational& y) {
    return x.num * y.den < y.num * x.den;
  }
  friend bool operator<=(const Rational& x, const Rational& y) {
    return x.num * y.den <= y.num * x.den;
  }

  double to_double() const {
    return static_cast<double>(num) / static_cast<double>(den);
  }
  long double to_long_double() const {
    return static_cast<long double>(num) / static_cast<long double>(den);
  }

  std::string str() const {
    auto i128_str = [](__int128 v) {
      if (v == 0) return std::string("0");
      bool neg = v < 0;
      unsigned __int128 u = neg ? -(unsigned __int128)v : (unsigned __int128)v;
      std::string s;
      while (u) { s.insert(s.begin(), char('0' + int(u % 10))); u /= 10; }
      if (neg) s.insert(s.begin(), '-');
      return s;
    };
    if (den == 1) return i128_str(num);
    return i128_str(num) + "/" + i128_str(den);
  }

  // Parses "3/10", "7", "0.25", "-1/2".
  static Rational parse(const std::string& s);
};

inline Rational Rational::parse(const std::string& s) {
  auto slash = s.find('/');
  auto to_i64 = [](const std::string& t) -> std::int64_t {
    size_t pos = 0;
    long long v = std::stoll(t, &pos);
    if (pos != t.size()) fail(Errc::BadConfig, "bad rational literal: " + t);
    return v;
  };
  if (slash != std::string::npos) {
    return Rational(to_i64(s.substr(0, slash)), to_i64(s.substr(slash + 1)));
  }
  auto dot = s.find('.');
  if (dot == std::string::npos) return Rational(to_i64(s));
  std::string whole = s.substr(0, dot), frac = s.substr(dot + 1);
  if (frac.size() > 17) frac = frac.substr(0, 17);
  bool neg = !whole.empty() && whole[0] == '-';
  std::int64_t w = whole.empty() || whole == "-" ? 0 : to_i64(whole);
  std::int64_t f = frac.empty() ? 0 : to_i64(frac);
  std::int64_t scale = 1;
  for (size_t i = 0; i < frac.size(); ++i) scale *= 10;
  Rational r(std::llabs(w), 1);
  r += Rational(f, scale);
  if (neg || w < 0) r.num = -r.num;
  return r;
}

// Dyadic rational closest to x with denominator 2^40; used to freeze an
// irrational schedule value into an exact entry distribution.
inline Rational dyadic_approx(double x) {
  const std::int64_t den = 1ll << 40;
  long double scaled = static_cast<long double>(x) * den;
  std::int64_t num = static_cast<std::int64_t>(scaled + (scaled >= 0 ? 0.5L : -0.5L));
  return Rational(num, den);
}

}  // namespace coklab
