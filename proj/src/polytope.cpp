#include "toric/polytope.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace toric {
namespace {

using Matrix = std::vector<Point>;

// Reduced row echelon form in place; returns pivot columns.
std::vector<std::size_t> row_reduce(Matrix& M, std::size_t cols) {
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t col = 0; col < cols && row < M.size(); ++col) {
    std::size_t pick = row;
    while (pick < M.size() && M[pick][col] == 0) ++pick;
    if (pick == M.size()) continue;
    std::swap(M[row], M[pick]);
    Rational inv = 1 / M[row][col];
    for (auto& x : M[row]) x *= inv;
    for (std::size_t r = 0; r < M.size(); ++r) {
      if (r == row || M[r][col] == 0) continue;
      Rational f = M[r][col];
      for (std::size_t c = col; c < M[r].size(); ++c) M[r][c] -= f * M[row][c];
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

std::optional<Point> solve_square(const std::vector<const Facet*>& rows) {
  const std::size_t n = rows.size();
  Matrix M(n, Point(n + 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) M[i][j] = rows[i]->normal[j];
    M[i][n] = rows[i]->offset;
  }
  auto piv = row_reduce(M, n);
  if (piv.size() < n) return std::nullopt;
  Point x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = M[i][n];
  return x;
}

std::size_t affine_rank(const std::vector<Point>& pts) {
  if (pts.size() < 2) return 0;
  Matrix M;
  for (std::size_t i = 1; i < pts.size(); ++i) M.push_back(pts[i] - pts[0]);
  return row_reduce(M, pts[0].size()).size();
}

// Normal of the hyperplane through n points in R^n, if they span one.
std::optional<Point> hyperplane_normal(const std::vector<Point>& pts) {
  const std::size_t n = pts[0].size();
  Matrix M;
  for (std::size_t i = 1; i < pts.size(); ++i) M.push_back(pts[i] - pts[0]);
  auto piv = row_reduce(M, n);
  if (piv.size() != n - 1) return std::nullopt;
  std::size_t free_col = 0;
  while (std::find(piv.begin(), piv.end(), free_col) != piv.end()) ++free_col;
  Point normal(n);
  normal[free_col] = 1;
  for (std::size_t r = 0; r < piv.size(); ++r) normal[piv[r]] = -M[r][free_col];
  return normal;
}

bool lex_less(const Point& a, const Point& b) { return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end()); }

std::vector<Point> unique_points(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(), lex_less);
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

Rational cross(const Point& o, const Point& a, const Point& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

Facet edge_facet(const Point& from, const Point& to, int tag) {
  // Inward normal of a counterclockwise edge is the left normal (-dy, dx).
  Point d = to - from;
  Facet f;
  f.normal = primitive_direction(Point{-d[1], d[0]});
  f.offset = dot(f.normal, from);
  f.tag = tag;
  return f;
}

Facet facet_from_halfspace(const HalfSpace& h) {
  Facet f;
  f.normal = primitive_direction(h.normal);
  std::size_t j = 0;
  while (h.normal[j] == 0) ++j;
  f.offset = h.offset * Rational(f.normal[j]) / h.normal[j];
  f.tag = kCutTag;
  return f;
}

void check_dims(int dim, const std::vector<Point>& pts) {
  if (dim < 1) throw std::invalid_argument("polytope dimension must be >= 1");
  for (const auto& p : pts) {
    if (static_cast<int>(p.size()) != dim) throw std::invalid_argument("point has wrong dimension");
  }
}

}  // namespace

Polytope Polytope::from_vertices(int dim, const std::vector<Point>& points) {
  check_dims(dim, points);
  auto pts = unique_points(points);
  if (pts.size() < static_cast<std::size_t>(dim) + 1 || affine_rank(pts) < static_cast<std::size_t>(dim))
    throw GeometryError("degenerate input: points are not full-dimensional");

  Polytope P;
  P.dim_ = dim;
  if (dim == 1) {
    P.vertices_ = {pts.front(), pts.back()};
    P.facets_ = {Facet{{1}, pts.front()[0], 0}, Facet{{-1}, -pts.back()[0], 1}};
    return P;
  }
  if (dim == 2) {
    // Andrew's monotone chain; strict turns only, so collinear points drop out.
    std::vector<Point> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
      while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
      hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
      while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
      hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    P.vertices_ = hull;
    for (std::size_t i = 0; i < hull.size(); ++i)
      P.facets_.push_back(edge_facet(hull[i], hull[(i + 1) % hull.size()], static_cast<int>(i)));
    return P;
  }

  // General dimension: every n-subset spanning a supporting hyperplane.
  const std::size_t n = static_cast<std::size_t>(dim);
  std::set<std::pair<IntVector, Rational>> seen;
  std::vector<std::size_t> idx(n);
  std::vector<Facet> facets;
  std::function<void(std::size_t, std::size_t)> choose = [&](std::size_t start, std::size_t depth) {
    if (depth == n) {
      std::vector<Point> sub;
      for (auto i : idx) sub.push_back(pts[i]);
      auto normal = hyperplane_normal(sub);
      if (!normal) return;
      Rational c = dot(*normal, sub[0]);
      int side = 0;
      for (const auto& p : pts) {
        int s = sign(dot(*normal, p) - c);
        if (s == 0) continue;
        if (side == 0) side = s;
        else if (s != side) return;
      }
      Point oriented = side < 0 ? Rational(-1) * *normal : *normal;
      Facet f;
      f.normal = primitive_direction(oriented);
      f.offset = dot(f.normal, sub[0]);
      if (seen.insert({f.normal, f.offset}).second) facets.push_back(f);
      return;
    }
    for (std::size_t i = start; i < pts.size(); ++i) {
      idx[depth] = i;
      choose(i + 1, depth + 1);
    }
  };
  choose(0, 0);
  std::sort(facets.begin(), facets.end(), [](const Facet& a, const Facet& b) {
    return std::tie(a.normal, a.offset) < std::tie(b.normal, b.offset);
  });
  for (std::size_t i = 0; i < facets.size(); ++i) facets[i].tag = static_cast<int>(i);
  P.facets_ = facets;
  for (const auto& p : pts) {
    Matrix tight;
    for (const auto& f : facets)
      if (f.defining_function(p) == 0) tight.push_back(to_point(f.normal));
    if (row_reduce(tight, n).size() == n) P.vertices_.push_back(p);
  }
  return P;
}

Polytope Polytope::from_facets(int dim, const std::vector<Facet>& input) {
  if (dim < 1) throw std::invalid_argument("polytope dimension must be >= 1");
  const std::size_t n = static_cast<std::size_t>(dim);
  std::vector<Facet> facets;
  for (std::size_t i = 0; i < input.size(); ++i) {
    Facet f = input[i];
    if (f.normal.size() != n) throw std::invalid_argument("facet normal has wrong dimension");
    if (gcd_of(f.normal) != 1) throw std::invalid_argument("facet normal is not primitive");
    facets.push_back(f);
  }
  // Among parallel facets with equal normals keep the tightest; ties keep the first.
  std::vector<Facet> kept;
  for (const auto& f : facets) {
    auto it = std::find_if(kept.begin(), kept.end(), [&](const Facet& g) { return g.normal == f.normal; });
    if (it == kept.end()) kept.push_back(f);
    else if (f.offset > it->offset) *it = f;
  }

  std::vector<Point> candidates;
  std::vector<std::size_t> idx(n);
  std::vector<const Facet*> rows(n);
  std::function<void(std::size_t, std::size_t)> choose = [&](std::size_t start, std::size_t depth) {
    if (depth == n) {
      auto x = solve_square(rows);
      if (!x) return;
      for (const auto& f : kept)
        if (f.defining_function(*x) < 0) return;
      candidates.push_back(*x);
      return;
    }
    for (std::size_t i = start; i < kept.size(); ++i) {
      rows[depth] = &kept[i];
      choose(i + 1, depth + 1);
    }
  };
  choose(0, 0);
  candidates = unique_points(candidates);
  if (candidates.size() < n + 1 || affine_rank(candidates) < n)
    throw GeometryError("facet system is empty, lower-dimensional or unbounded");

  Polytope hull = from_vertices(dim, candidates);
  for (auto& hf : hull.facets_) {
    auto it = std::find_if(kept.begin(), kept.end(),
                           [&](const Facet& g) { return g.normal == hf.normal && g.offset == hf.offset; });
    if (it == kept.end()) throw GeometryError("facet system is unbounded");
    hf.tag = it->tag;
  }
  return hull;
}

bool Polytope::contains(const Point& x) const {
  return std::all_of(facets_.begin(), facets_.end(), [&](const Facet& f) { return f.defining_function(x) >= 0; });
}

std::vector<std::size_t> Polytope::facet_vertices(std::size_t i) const {
  if (dim_ == 1) return {i};
  if (dim_ == 2) return {i, (i + 1) % vertices_.size()};
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < vertices_.size(); ++v)
    if (facets_[i].defining_function(vertices_[v]) == 0) out.push_back(v);
  return out;
}

std::size_t Polytope::tag_count() const {
  int m = -1;
  for (const auto& f : facets_) m = std::max(m, f.tag);
  return static_cast<std::size_t>(m + 1);
}

bool Polytope::has_integral_vertices() const {
  for (const auto& v : vertices_)
    for (const auto& x : v)
      if (denominator(x) != 1) return false;
  return true;
}

Polytope Polytope::transformed(const std::vector<IntVector>& T, const Point& shift) const {
  const std::size_t n = static_cast<std::size_t>(dim_);
  if (T.size() != n || shift.size() != n) throw std::invalid_argument("transformed: dimension mismatch");
  // Inverse transpose of T, which must be integral for a unimodular T.
  Matrix M(n, Point(2 * n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) M[i][j] = T[j][i];
    M[i][n + i] = 1;
  }
  if (row_reduce(M, n).size() != n) throw std::invalid_argument("transformed: singular matrix");
  std::vector<Facet> facets;
  for (const auto& f : facets_) {
    Point nu(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) nu[i] += M[i][n + j] * Rational(f.normal[j]);
      if (denominator(nu[i]) != 1) throw std::invalid_argument("transformed: matrix is not unimodular");
    }
    Facet g;
    g.normal = primitive_direction(nu);
    if (to_point(g.normal) != nu) throw std::invalid_argument("transformed: matrix is not unimodular");
    g.offset = f.offset + dot(g.normal, shift);
    g.tag = f.tag;
    facets.push_back(g);
  }
  return from_facets(dim_, facets);
}

BoundaryMeasure BoundaryMeasure::uniform(const Polytope& P) {
  return BoundaryMeasure{std::vector<Rational>(P.tag_count(), Rational(1))};
}

void BoundaryMeasure::validate(const Polytope& P) const {
  if (weights.size() < P.tag_count())
    throw std::invalid_argument("boundary measure has fewer weights than the polytope has facets");
  for (const auto& w : weights)
    if (w <= 0) throw std::invalid_argument("boundary weights must be positive");
}

std::pair<Rational, Point> volume_and_centroid(const Polytope& P) {
  const auto& V = P.vertices();
  if (P.dim() == 1) return {V[1][0] - V[0][0], Point{(V[0][0] + V[1][0]) / 2}};
  if (P.dim() == 2) {
    Rational twice_area = 0, cx = 0, cy = 0;
    for (std::size_t i = 0; i < V.size(); ++i) {
      const auto& a = V[i];
      const auto& b = V[(i + 1) % V.size()];
      Rational c = a[0] * b[1] - b[0] * a[1];
      twice_area += c;
      cx += (a[0] + b[0]) * c;
      cy += (a[1] + b[1]) * c;
    }
    return {twice_area / 2, Point{cx / (3 * twice_area), cy / (3 * twice_area)}};
  }
  return volume_and_centroid_by_cones(P);
}

Rational volume(const Polytope& P) { return volume_and_centroid(P).first; }
Point centroid(const Polytope& P) { return volume_and_centroid(P).second; }

FacetMeasure facet_measure(const Polytope& P, std::size_t i) {
  const auto& f = P.facets().at(i);
  const auto& V = P.vertices();
  if (P.dim() == 1) return {Rational(1), V[i]};
  if (P.dim() == 2) {
    const auto& a = V[i];
    const auto& b = V[(i + 1) % V.size()];
    // The edge runs along (-nu_2, nu_1); its lattice length is the multiple.
    Rational len = f.normal[1] != 0 ? (b[0] - a[0]) / Rational(-f.normal[1]) : (b[1] - a[1]) / Rational(f.normal[0]);
    if (len < 0) len = -len;
    return {len, Rational(1, 2) * (a + b)};
  }
  // Project the facet along a coordinate with nonzero normal entry; the
  // projected (n-1)-volume is |nu_j| times the lattice volume.
  const std::size_t n = static_cast<std::size_t>(P.dim());
  std::size_t j = 0;
  for (std::size_t k = 1; k < n; ++k)
    if (std::abs(f.normal[k]) > std::abs(f.normal[j])) j = k;
  std::vector<Point> projected;
  for (auto v : P.facet_vertices(i)) {
    Point q;
    for (std::size_t k = 0; k < n; ++k)
      if (k != j) q.push_back(V[v][k]);
    projected.push_back(q);
  }
  auto face = Polytope::from_vertices(P.dim() - 1, projected);
  auto [vol, c] = volume_and_centroid(face);
  Point lifted(n);
  Rational rest = f.offset;
  for (std::size_t k = 0, m = 0; k < n; ++k) {
    if (k == j) continue;
    lifted[k] = c[m++];
    rest -= Rational(f.normal[k]) * lifted[k];
  }
  lifted[j] = rest / Rational(f.normal[j]);
  Rational nj = f.normal[j] < 0 ? Rational(-f.normal[j]) : Rational(f.normal[j]);
  return {vol / nj, lifted};
}

std::pair<Rational, Point> volume_and_centroid_by_cones(const Polytope& P) {
  const std::size_t n = static_cast<std::size_t>(P.dim());
  Point apex(n);
  for (const auto& v : P.vertices()) apex = apex + v;
  apex = Rational(1, static_cast<long>(P.vertices().size())) * apex;
  Rational vol = 0;
  Point moment(n);
  for (std::size_t i = 0; i < P.facets().size(); ++i) {
    auto fm = facet_measure(P, i);
    Rational cone = P.facets()[i].defining_function(apex) * fm.lattice_volume / Rational(static_cast<long>(n));
    Point c = apex + Rational(static_cast<long>(n), static_cast<long>(n + 1)) * (fm.centroid - apex);
    vol += cone;
    moment = moment + cone * c;
  }
  return {vol, Rational(1) / vol * moment};
}

Measures measures(const Polytope& P, const BoundaryMeasure& sigma) {
  sigma.validate(P);
  Measures m;
  std::tie(m.volume, m.centroid) = volume_and_centroid(P);
  m.boundary_volume = 0;
  Point moment(static_cast<std::size_t>(P.dim()));
  for (std::size_t i = 0; i < P.facets().size(); ++i) {
    const auto& f = P.facets()[i];
    if (f.tag < 0) continue;
    auto fm = facet_measure(P, i);
    Rational mass = sigma.weight(f.tag) * fm.lattice_volume;
    m.boundary_volume += mass;
    moment = moment + mass * fm.centroid;
  }
  m.A = m.boundary_volume / m.volume;
  m.boundary_centroid = Rational(1) / m.boundary_volume * moment;
  return m;
}

std::optional<Polytope> clip(const Polytope& P, const HalfSpace& h) {
  if (h.normal.size() != static_cast<std::size_t>(P.dim())) throw std::invalid_argument("clip: dimension mismatch");
  if (std::all_of(h.normal.begin(), h.normal.end(), [](const Rational& x) { return x == 0; })) {
    if (h.offset <= 0) return P;
    return std::nullopt;
  }
  if (P.dim() >= 3) return clip_generic(P, h);

  const auto& V = P.vertices();
  std::vector<Rational> s;
  s.reserve(V.size());
  bool any_pos = false, any_neg = false;
  for (const auto& v : V) {
    s.push_back(dot(h.normal, v) - h.offset);
    any_pos |= s.back() > 0;
    any_neg |= s.back() < 0;
  }
  if (!any_neg) return P;
  if (!any_pos) return std::nullopt;

  Facet cut = facet_from_halfspace(h);
  Polytope Q;
  Q.dim_ = P.dim();
  if (P.dim() == 1) {
    Rational x = cut.offset / Rational(cut.normal[0]);
    if (cut.normal[0] > 0) {
      Q.vertices_ = {Point{x}, V[1]};
      Q.facets_ = {cut, P.facets_[1]};
    } else {
      Q.vertices_ = {V[0], Point{x}};
      Q.facets_ = {P.facets_[0], cut};
    }
    return Q;
  }

  // Sutherland-Hodgman on a single halfspace, carrying the edge facet that
  // leaves each output vertex.
  const std::size_t m = V.size();
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t j = (i + 1) % m;
    const Rational& si = s[i];
    const Rational& sj = s[j];
    if (si >= 0) {
      if (sj >= 0) {
        Q.vertices_.push_back(V[i]);
        Q.facets_.push_back(P.facets_[i]);
      } else if (si == 0) {
        Q.vertices_.push_back(V[i]);
        Q.facets_.push_back(cut);
      } else {
        Q.vertices_.push_back(V[i]);
        Q.facets_.push_back(P.facets_[i]);
        Rational t = si / (si - sj);
        Q.vertices_.push_back(V[i] + t * (V[j] - V[i]));
        Q.facets_.push_back(cut);
      }
    } else if (sj > 0) {
      Rational t = si / (si - sj);
      Q.vertices_.push_back(V[i] + t * (V[j] - V[i]));
      Q.facets_.push_back(P.facets_[i]);
    }
  }
  if (Q.vertices_.size() < 3) return std::nullopt;
  return Q;
}

std::optional<Polytope> clip_generic(const Polytope& P, const HalfSpace& h) {
  auto facets = P.facets();
  facets.push_back(facet_from_halfspace(h));
  try {
    return Polytope::from_facets(P.dim(), facets);
  } catch (const GeometryError&) {
    return std::nullopt;
  }
}

bool is_delzant(const Polytope& P) {
  const std::size_t n = static_cast<std::size_t>(P.dim());
  for (const auto& v : P.vertices()) {
    Matrix normals;
    for (const auto& f : P.facets())
      if (f.defining_function(v) == 0) normals.push_back(to_point(f.normal));
    if (normals.size() != n) return false;
    // Determinant by elimination, tracking pivots.
    Rational det = 1;
    Matrix M = normals;
    for (std::size_t c = 0; c < n; ++c) {
      std::size_t r = c;
      while (r < n && M[r][c] == 0) ++r;
      if (r == n) return false;
      if (r != c) {
        std::swap(M[r], M[c]);
        det = -det;
      }
      det *= M[c][c];
      for (std::size_t k = c + 1; k < n; ++k) {
        Rational f = M[k][c] / M[c][c];
        for (std::size_t l = c; l < n; ++l) M[k][l] -= f * M[c][l];
      }
    }
    if (det != 1 && det != -1) return false;
  }
  return true;
}

Quadratic Quadratic::zero(int n) {
  const auto m = static_cast<std::size_t>(n);
  return Quadratic{Rational(0), Point(m), std::vector<Point>(m, Point(m))};
}

Rational Quadratic::operator()(const Point& x) const {
  Rational v = constant + dot(linear, x);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) v += hessian[i][j] * x[i] * x[j] / 2;
  return v;
}

Rational integrate_quadratic(const Polytope& P, const Quadratic& q) {
  const auto& V = P.vertices();
  if (P.dim() == 1) {
    Rational a = V[0][0], b = V[1][0];
    return (b - a) * (q(V[0]) + 4 * q(Point{(a + b) / 2}) + q(V[1])) / 6;
  }
  if (P.dim() != 2) throw std::invalid_argument("integrate_quadratic supports n = 1, 2");
  // Fan triangulation; the edge-midpoint rule is exact for quadratics.
  Rational total = 0;
  for (std::size_t i = 1; i + 1 < V.size(); ++i) {
    const auto &a = V[0], &b = V[i], &c = V[i + 1];
    Rational area = cross(a, b, c) / 2;
    Rational half = Rational(1, 2);
    total += area * (q(half * (a + b)) + q(half * (b + c)) + q(half * (a + c))) / 3;
  }
  return total;
}

Rational integrate_quadratic_on_facet(const Polytope& P, std::size_t i, const Quadratic& q) {
  const auto& V = P.vertices();
  if (P.dim() == 1) return q(V[i]);
  if (P.dim() != 2) throw std::invalid_argument("integrate_quadratic_on_facet supports n = 1, 2");
  auto fm = facet_measure(P, i);
  const auto& a = V[i];
  const auto& b = V[(i + 1) % V.size()];
  return fm.lattice_volume * (q(a) + 4 * q(fm.centroid) + q(b)) / 6;
}

}  // namespace toric
