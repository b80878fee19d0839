#include "toric/rational.hpp"

#include <cstdlib>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace toric {

Rational dot(const Point& a, const Point& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Rational dot(const IntVector& a, const Point& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != 0) s += Rational(a[i]) * b[i];
  }
  return s;
}

Point to_point(const IntVector& v) {
  Point p;
  p.reserve(v.size());
  for (auto x : v) p.emplace_back(x);
  return p;
}

Point operator+(const Point& a, const Point& b) {
  Point r(a);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}

Point operator-(const Point& a, const Point& b) {
  Point r(a);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return r;
}

Point operator*(const Rational& s, const Point& a) {
  Point r(a);
  for (auto& x : r) x *= s;
  return r;
}

Rational parse_rational(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw std::invalid_argument("empty rational");
  auto slash = s.find('/');
  try {
    if (slash != std::string::npos) {
      Integer num(s.substr(0, slash));
      Integer den(s.substr(slash + 1));
      if (den == 0) throw std::invalid_argument("zero denominator in '" + s + "'");
      return Rational(num, den);
    }
    auto dot_pos = s.find('.');
    if (dot_pos != std::string::npos) {
      std::string digits = s.substr(0, dot_pos) + s.substr(dot_pos + 1);
      if (digits.empty() || digits == "-" || digits == "+") throw std::invalid_argument(s);
      Integer num(digits);
      Integer den = 1;
      for (std::size_t i = dot_pos + 1; i < s.size(); ++i) den *= 10;
      return Rational(num, den);
    }
    return Rational(Integer(s));
  } catch (const std::runtime_error&) {
    throw std::invalid_argument("not a rational number: '" + s + "'");
  }
}

std::string to_string(const Rational& r) { return r.str(); }

std::string to_string(const Point& p) {
  std::string s = "(";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) s += ", ";
    s += p[i].str();
  }
  return s + ")";
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

std::vector<double> to_double(const Point& p) {
  std::vector<double> out;
  out.reserve(p.size());
  for (const auto& x : p) out.push_back(to_double(x));
  return out;
}

Integer floor_rational(const Rational& r) {
  Integer n = numerator(r), d = denominator(r);
  Integer q = n / d;  // truncates toward zero
  if (n < 0 && q * d != n) q -= 1;
  return q;
}

Integer ceil_rational(const Rational& r) {
  Integer f = floor_rational(r);
  return Rational(f) == r ? f : f + 1;
}

std::int64_t gcd_of(const IntVector& v) {
  std::int64_t g = 0;
  for (auto x : v) g = std::gcd(g, x < 0 ? -x : x);
  return g;
}

IntVector primitive_direction(const Point& v) {
  Integer lcm_den = 1;
  for (const auto& x : v) lcm_den = boost::multiprecision::lcm(lcm_den, Integer(denominator(x)));
  std::vector<Integer> ints;
  Integer g = 0;
  for (const auto& x : v) {
    Integer k = numerator(x) * (lcm_den / denominator(x));
    ints.push_back(k);
    g = boost::multiprecision::gcd(g, boost::multiprecision::abs(k));
  }
  if (g == 0) throw std::invalid_argument("primitive_direction: zero vector");
  IntVector out;
  for (auto& k : ints) {
    Integer q = k / g;
    if (q > std::numeric_limits<std::int64_t>::max() || q < std::numeric_limits<std::int64_t>::min())
      throw std::overflow_error("primitive_direction: entry exceeds 64 bits");
    out.push_back(q.convert_to<std::int64_t>());
  }
  return out;
}

}  // namespace toric
