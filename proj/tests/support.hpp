// Shared helpers for the test suites: seeded random polytopes, weights and
// unimodular transforms.
#pragma once

#include "toric/polytope.hpp"
#include "toric/stability.hpp"

#include <random>

namespace toric::testing {

using Rng = std::mt19937_64;

inline Rational random_rational(Rng& rng, int range, int max_den) {
  std::uniform_int_distribution<int> den(1, max_den);
  const int q = den(rng);
  std::uniform_int_distribution<int> num(-range * q, range * q);
  return Rational(num(rng), q);
}

inline Point random_point(Rng& rng, int dim, int range, int max_den) {
  Point p;
  for (int i = 0; i < dim; ++i) p.push_back(random_rational(rng, range, max_den));
  return p;
}

/// Hull of random rational points; retries until the hull is full-dimensional.
inline Polytope random_polygon(Rng& rng, int points = 7, int range = 3, int max_den = 3) {
  while (true) {
    std::vector<Point> pts;
    for (int i = 0; i < points; ++i) pts.push_back(random_point(rng, 2, range, max_den));
    try {
      return Polytope::from_vertices(2, pts);
    } catch (const GeometryError&) {
    }
  }
}

inline Polytope random_lattice_polygon(Rng& rng, int points = 6, int range = 3) {
  return random_polygon(rng, points, range, 1);
}

inline BoundaryMeasure random_weights(Rng& rng, const Polytope& P) {
  std::uniform_int_distribution<int> num(1, 9), den(1, 4);
  BoundaryMeasure s;
  for (std::size_t i = 0; i < P.tag_count(); ++i) s.weights.emplace_back(num(rng), den(rng));
  return s;
}

/// Product of random elementary matrices: integer entries, det ±1.
inline std::vector<IntVector> random_unimodular(Rng& rng, int steps = 4) {
  std::vector<IntVector> T{{1, 0}, {0, 1}};
  std::uniform_int_distribution<int> kind(0, 2), coeff(-2, 2);
  for (int s = 0; s < steps; ++s) {
    const int k = kind(rng), c = coeff(rng);
    std::vector<IntVector> E{{1, 0}, {0, 1}};
    if (k == 0) E[0][1] = c;
    if (k == 1) E[1][0] = c;
    if (k == 2) E = {{0, 1}, {1, 0}};
    std::vector<IntVector> M{{0, 0}, {0, 0}};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int l = 0; l < 2; ++l) M[i][j] += E[i][l] * T[l][j];
    T = M;
  }
  return T;
}

inline std::vector<IntVector> inverse2(const std::vector<IntVector>& T) {
  const std::int64_t det = T[0][0] * T[1][1] - T[0][1] * T[1][0];
  return {{T[1][1] * det, -T[0][1] * det}, {-T[1][0] * det, T[0][0] * det}};
}

/// Pulls an affine function on TP + s back to P: g(x) = f(Tx + s).
inline AffineFunction pull_back(const AffineFunction& f, const std::vector<IntVector>& T, const Point& s) {
  AffineFunction g{Point(2), f(s)};
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 2; ++i) g.gradient[j] += f.gradient[i] * Rational(T[i][j]);
  return g;
}

/// The affine function on TP + s whose pull-back is f.
inline AffineFunction push_forward(const AffineFunction& f, const std::vector<IntVector>& T, const Point& s) {
  auto Ti = inverse2(T);
  // f(Ti (y - s)) = <Ti^T a, y> - <Ti^T a, s> + b
  AffineFunction g{Point(2), f.constant};
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 2; ++i) g.gradient[j] += f.gradient[i] * Rational(Ti[i][j]);
  g.constant -= dot(g.gradient, s);
  return g;
}

inline AffineFunction random_affine(Rng& rng, int dim) {
  return AffineFunction{random_point(rng, dim, 3, 3), random_rational(rng, 3, 3)};
}

inline PLConvexFunction random_pl(Rng& rng, int dim, int pieces) {
  std::vector<AffineFunction> ps;
  for (int i = 0; i < pieces; ++i) ps.push_back(random_affine(rng, dim));
  return PLConvexFunction(ps);
}

inline PLConvexFunction push_forward(const PLConvexFunction& f, const std::vector<IntVector>& T, const Point& s) {
  std::vector<AffineFunction> ps;
  for (const auto& p : f.pieces()) ps.push_back(push_forward(p, T, s));
  return PLConvexFunction(ps);
}

}  // namespace toric::testing
