// Exact arithmetic primitives shared by the polytope, stability and futaki
// modules. Floating point only appears downstream (geometry, solver).
#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace toric {

using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;

/// A point or vector in Q^n.
using Point = std::vector<Rational>;
/// An integer vector (facet normals, crease directions, torus weights).
using IntVector = std::vector<std::int64_t>;

Rational dot(const Point& a, const Point& b);
Rational dot(const IntVector& a, const Point& b);

Point to_point(const IntVector& v);
Point operator+(const Point& a, const Point& b);
Point operator-(const Point& a, const Point& b);
Point operator*(const Rational& s, const Point& a);

/// Parses "p", "p/q", or a decimal like "0.25" into an exact rational.
Rational parse_rational(std::string_view text);

/// "p/q" or "p" in lowest terms.
std::string to_string(const Rational& r);
std::string to_string(const Point& p);

double to_double(const Rational& r);
std::vector<double> to_double(const Point& p);

Integer floor_rational(const Rational& r);
Integer ceil_rational(const Rational& r);

std::int64_t gcd_of(const IntVector& v);

/// Scales a nonzero rational vector to the primitive integer vector pointing
/// the same way. Throws std::overflow_error if an entry leaves int64 range.
IntVector primitive_direction(const Point& v);

inline int sign(const Rational& r) { return r.sign(); }

}  // namespace toric
