#pragma once

#include <boost/functional/hash.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <cstddef>
#include <string>

#include "furst/errors.hpp"
#include "furst/mat2.hpp"

namespace furst {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Parses "p/q", an integer, or a plain decimal ("-0.215" -> -43/200).
// cpp_rational keeps values reduced to lowest terms with a positive
// denominator, so parsed values are already in canonical form.
Rational parse_rational(const std::string& text);

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

// log2 of a positive integer; splits off the high bits first so values far
// beyond double range still work.
inline double log2_int(const BigInt& n) {
  unsigned bits = msb(n);
  if (bits <= 62) return std::log2(n.convert_to<double>());
  BigInt top = n >> (bits - 52);
  return std::log2(top.convert_to<double>()) + static_cast<double>(bits - 52);
}

// log2 of a positive rational. When numerator and denominator are both
// powers of two the result is an exact integer, which is what makes dyadic
// entropies come out exact downstream.
inline double log2_rational(const Rational& r) {
  if (r <= 0) throw DomainError("log2_rational needs a positive argument");
  const BigInt num = numerator(r);
  const BigInt den = denominator(r);
  const bool num_pow2 = lsb(num) == msb(num);
  const bool den_pow2 = lsb(den) == msb(den);
  if (num_pow2 && den_pow2)
    return static_cast<double>(static_cast<long>(msb(num)) -
                               static_cast<long>(msb(den)));
  return log2_int(num) - log2_int(den);
}

// Exact-rational 2x2 matrix. Entries stay in lowest terms automatically, so
// equality and hashing are exact with no tolerance anywhere.
struct Mat2Q {
  Rational a{1}, b{0}, c{0}, d{1};  // row-major [[a, b], [c, d]]

  friend Mat2Q operator*(const Mat2Q& l, const Mat2Q& r) {
    return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d,
            l.c * r.a + l.d * r.c, l.c * r.b + l.d * r.d};
  }
  friend bool operator==(const Mat2Q& l, const Mat2Q& r) {
    return l.a == r.a && l.b == r.b && l.c == r.c && l.d == r.d;
  }
};

inline Rational det(const Mat2Q& m) { return m.a * m.d - m.b * m.c; }

inline Mat2 to_mat2(const Mat2Q& m) {
  return {to_double(m.a), to_double(m.b), to_double(m.c), to_double(m.d)};
}

// Exact check, no tolerance: rational input admits no rounding excuse.
inline void validate_sl2(const Mat2Q& m) {
  Rational d = det(m);
  if (d != 1) throw DeterminantError(to_double(d));
}

struct Mat2QHash {
  std::size_t operator()(const Mat2Q& m) const {
    std::size_t h = boost::hash<Rational>{}(m.a);
    boost::hash_combine(h, m.b);
    boost::hash_combine(h, m.c);
    boost::hash_combine(h, m.d);
    return h;
  }
};

// Lower and upper unit shears with off-diagonal t: the standard
// two-generator family whose freeness and separation properties the exact
// layer measures.
inline std::vector<Mat2Q> shear_pair(const Rational& t) {
  Mat2Q lower{1, 0, t, 1};
  Mat2Q upper{1, t, 0, 1};
  return {lower, upper};
}

}  // namespace furst
