// Exact rational convex polytopes with primitive inward facet normals.
//
// A polytope is stored in both representations. Facets are inequalities
// <normal, x> >= offset with a primitive integer normal; every facet carries a
// tag that identifies which facet of the *original* polytope it came from, so
// that boundary weights survive clipping. Cuts introduced by clip() carry
// kCutTag and never contribute to boundary integrals.
//
// Layout conventions:
//   n = 1: vertices {lo, hi}; facet i is the endpoint vertices[i].
//   n = 2: vertices counterclockwise; facet i is the edge vertices[i] -> vertices[i+1].
//   n >= 3: vertices and facets sorted lexicographically.
#pragma once

#include "toric/rational.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace toric {

inline constexpr int kCutTag = -1;

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Facet {
  IntVector normal;
  Rational offset;
  int tag = kCutTag;

  Rational defining_function(const Point& x) const { return dot(normal, x) - offset; }
};

/// Inequality <normal, x> >= offset with a rational (not necessarily primitive)
/// normal. Used as input to construction and clipping.
struct HalfSpace {
  Point normal;
  Rational offset;
};

class Polytope {
 public:
  /// Convex hull of at least n+1 affinely independent points.
  static Polytope from_vertices(int dim, const std::vector<Point>& points);
  /// Intersection of halfspaces; facets keep their tags (tags default to their
  /// index). Redundant inequalities are dropped. Throws on unbounded or
  /// lower-dimensional input.
  static Polytope from_facets(int dim, const std::vector<Facet>& facets);

  int dim() const { return dim_; }
  const std::vector<Facet>& facets() const { return facets_; }
  const std::vector<Point>& vertices() const { return vertices_; }

  bool contains(const Point& x) const;
  /// Indices of the vertices lying on facet i.
  std::vector<std::size_t> facet_vertices(std::size_t i) const;
  /// Highest facet tag + 1 (the size a BoundaryMeasure must have).
  std::size_t tag_count() const;

  /// Image under x -> T x + shift for an integer matrix T with |det T| = 1.
  /// Facet tags are preserved.
  Polytope transformed(const std::vector<IntVector>& T, const Point& shift) const;

  bool has_integral_vertices() const;

 private:
  Polytope() = default;
  int dim_ = 0;
  std::vector<Facet> facets_;
  std::vector<Point> vertices_;

  friend std::optional<Polytope> clip(const Polytope&, const HalfSpace&);
  friend std::optional<Polytope> clip_generic(const Polytope&, const HalfSpace&);
};

/// Positive rational density per facet tag, multiplying the lattice measure.
struct BoundaryMeasure {
  std::vector<Rational> weights;

  static BoundaryMeasure uniform(const Polytope& P);
  const Rational& weight(int tag) const { return weights.at(static_cast<std::size_t>(tag)); }
  void validate(const Polytope& P) const;
};

/// Lattice-normalized (n-1)-volume and centroid of one facet.
struct FacetMeasure {
  Rational lattice_volume;
  Point centroid;
};

struct Measures {
  Rational volume;
  Rational boundary_volume;
  Rational A;
  Point centroid;
  Point boundary_centroid;
};

Rational volume(const Polytope& P);
Point centroid(const Polytope& P);
/// Volume and centroid in one pass.
std::pair<Rational, Point> volume_and_centroid(const Polytope& P);
FacetMeasure facet_measure(const Polytope& P, std::size_t facet_index);
Measures measures(const Polytope& P, const BoundaryMeasure& sigma);

/// Recursive cone decomposition, valid in every dimension. n = 1, 2 use
/// the closed forms; this route exists as an independent check.
std::pair<Rational, Point> volume_and_centroid_by_cones(const Polytope& P);

/// P ∩ {<a,x> >= c}; nullopt when the intersection is empty or has no interior.
std::optional<Polytope> clip(const Polytope& P, const HalfSpace& h);
/// Same result through vertex enumeration of the H-representation (any n).
std::optional<Polytope> clip_generic(const Polytope& P, const HalfSpace& h);

bool is_delzant(const Polytope& P);

/// Quadratic polynomial c + <b,x> + (1/2) x^T H x with rational data.
struct Quadratic {
  Rational constant;
  Point linear;
  std::vector<Point> hessian;  // symmetric n x n

  static Quadratic zero(int n);
  Rational operator()(const Point& x) const;
};

/// Exact integral of a quadratic over P (dμ) and over each tagged facet (dσ,
/// unweighted). Supports n = 1, 2.
Rational integrate_quadratic(const Polytope& P, const Quadratic& q);
Rational integrate_quadratic_on_facet(const Polytope& P, std::size_t facet_index, const Quadratic& q);

}  // namespace toric
