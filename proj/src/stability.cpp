#include "toric/stability.hpp"

#include "toric/parallel.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <tuple>

namespace toric {
namespace {

std::string format_affine(const AffineFunction& a) {
  std::ostringstream os;
  bool first = true;
  auto term = [&](const Rational& c, const std::string& var) {
    if (c == 0) return;
    Rational mag = c < 0 ? Rational(-c) : c;
    if (first) os << (c < 0 ? "-" : "");
    else os << (c < 0 ? " - " : " + ");
    if (mag != 1 || var.empty()) os << mag.str();
    if (mag != 1 && !var.empty()) os << '*';
    os << var;
    first = false;
  };
  for (std::size_t i = 0; i < a.gradient.size(); ++i) term(a.gradient[i], "x" + std::to_string(i + 1));
  term(a.constant, "");
  if (first) os << '0';
  return os.str();
}

bool crease_less(const CreaseValue& a, const CreaseValue& b) {
  return std::tie(a.ratio, a.direction, a.offset) < std::tie(b.ratio, b.direction, b.offset);
}

// Boundary and interior integrals of an affine function over one cell.
Rational cell_contribution(const Polytope& cell, const BoundaryMeasure& sigma, const Rational& A,
                           const AffineFunction& piece) {
  auto [vol, c] = volume_and_centroid(cell);
  Rational total = -A * vol * piece(c);
  for (std::size_t i = 0; i < cell.facets().size(); ++i) {
    const auto& f = cell.facets()[i];
    if (f.tag < 0) continue;
    auto fm = facet_measure(cell, i);
    total += sigma.weight(f.tag) * fm.lattice_volume * piece(fm.centroid);
  }
  return total;
}

}  // namespace

PLConvexFunction::PLConvexFunction(std::vector<AffineFunction> pieces) : pieces_(std::move(pieces)) {
  if (pieces_.empty()) throw std::invalid_argument("PL function needs at least one piece");
  for (const auto& p : pieces_)
    if (p.gradient.size() != pieces_.front().gradient.size())
      throw std::invalid_argument("PL function pieces have mismatched dimensions");
}

PLConvexFunction PLConvexFunction::crease(const IntVector& direction, const Rational& offset) {
  AffineFunction zero{Point(direction.size()), Rational(0)};
  AffineFunction lin{to_point(direction), -offset};
  return PLConvexFunction({zero, lin});
}

Rational PLConvexFunction::operator()(const Point& x) const {
  Rational best = pieces_.front()(x);
  for (std::size_t i = 1; i < pieces_.size(); ++i) best = std::max(best, pieces_[i](x));
  return best;
}

std::vector<std::optional<Polytope>> PLConvexFunction::cells(const Polytope& P) const {
  std::vector<std::optional<Polytope>> out;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    std::optional<Polytope> cell = P;
    for (std::size_t j = 0; j < pieces_.size() && cell; ++j) {
      if (j == i) continue;
      HalfSpace h{pieces_[i].gradient - pieces_[j].gradient, pieces_[j].constant - pieces_[i].constant};
      if (pieces_[i] == pieces_[j] && j < i) {
        cell.reset();  // duplicate; the earlier copy owns the cell
        break;
      }
      cell = clip(*cell, h);
    }
    out.push_back(cell);
  }
  return out;
}

PLConvexFunction PLConvexFunction::canonical(const Polytope& P) const {
  auto cs = cells(P);
  std::vector<AffineFunction> kept;
  for (std::size_t i = 0; i < pieces_.size(); ++i)
    if (cs[i]) kept.push_back(pieces_[i]);
  return PLConvexFunction(kept);
}

std::string PLConvexFunction::to_string() const {
  if (pieces_.size() == 1) return format_affine(pieces_.front());
  std::string s = "max(";
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (i) s += ", ";
    s += format_affine(pieces_[i]);
  }
  return s + ")";
}

Rational functional_L(const Polytope& P, const BoundaryMeasure& sigma, const PLConvexFunction& f) {
  Rational A = measures(P, sigma).A;
  auto cs = f.cells(P);
  Rational total = 0;
  for (std::size_t i = 0; i < cs.size(); ++i)
    if (cs[i]) total += cell_contribution(*cs[i], sigma, A, f.pieces()[i]);
  return total;
}

Rational functional_L(const Polytope& P, const BoundaryMeasure& sigma, const AffineFunction& f) {
  Rational A = measures(P, sigma).A;
  return cell_contribution(P, sigma, A, f);
}

Rational functional_L(const Polytope& P, const BoundaryMeasure& sigma, const Quadratic& f) {
  Rational A = measures(P, sigma).A;
  Rational total = -A * integrate_quadratic(P, f);
  for (std::size_t i = 0; i < P.facets().size(); ++i) {
    int tag = P.facets()[i].tag;
    if (tag >= 0) total += sigma.weight(tag) * integrate_quadratic_on_facet(P, i, f);
  }
  return total;
}

Rational integral(const Polytope& P, const PLConvexFunction& f) {
  auto cs = f.cells(P);
  Rational total = 0;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (!cs[i]) continue;
    auto [vol, c] = volume_and_centroid(*cs[i]);
    total += vol * f.pieces()[i](c);
  }
  return total;
}

Point futaki_linear(const Polytope& P, const BoundaryMeasure& sigma) {
  auto m = measures(P, sigma);
  return m.boundary_volume * (m.boundary_centroid - m.centroid);
}

bool futaki_vanishes(const Point& futaki) {
  return std::all_of(futaki.begin(), futaki.end(), [](const Rational& x) { return x == 0; });
}

CreaseValue evaluate_crease(const Polytope& P, const BoundaryMeasure& sigma, const Rational& A,
                            const IntVector& direction, const Rational& offset) {
  CreaseValue v{direction, offset, Rational(0), Rational(0), Rational(0)};
  const Point a = to_point(direction);
  auto Q = clip(P, HalfSpace{a, offset});
  if (!Q) return v;
  AffineFunction piece{a, -offset};
  auto [vol, c] = volume_and_centroid(*Q);
  v.integral = vol * piece(c);
  v.L = cell_contribution(*Q, sigma, A, piece);
  if (v.integral > 0) v.ratio = v.L / v.integral;
  return v;
}

std::string to_string(StabilityStatus s) {
  switch (s) {
    case StabilityStatus::kUnstable: return "unstable";
    case StabilityStatus::kSemistableBoundary: return "semistable-boundary";
    case StabilityStatus::kStableAtResolution: return "stable-at-resolution";
  }
  return "?";
}

std::vector<IntVector> primitive_directions(int dim, int height) {
  std::vector<IntVector> out;
  IntVector v(static_cast<std::size_t>(dim), -height);
  while (true) {
    if (gcd_of(v) == 1) out.push_back(v);
    std::size_t k = 0;
    while (k < v.size() && v[k] == height) v[k++] = -height;
    if (k == v.size()) break;
    ++v[k];
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Rational> farey_offsets(const Rational& lo, const Rational& hi, int R) {
  std::vector<Rational> out;
  for (int q = 1; q <= R; ++q) {
    Integer first = floor_rational(lo * q) + 1;
    Integer last = ceil_rational(hi * q) - 1;
    for (Integer p = first; p <= last; ++p) out.emplace_back(p, q);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

StabilityVerdict crease_search(const Polytope& P, const BoundaryMeasure& sigma, int resolution,
                               const CreaseSearchOptions& options) {
  if (resolution <= 0) throw std::invalid_argument("crease_search: resolution must be positive");
  StabilityVerdict verdict;
  verdict.resolution = resolution;
  verdict.futaki = futaki_linear(P, sigma);
  const Rational A = measures(P, sigma).A;

  const bool linear_obstruction = !futaki_vanishes(verdict.futaki);
  if (linear_obstruction) {
    // f = max_P <d,x> - <d,x> >= 0 with d along the Futaki vector: L(f) = -<d, F> < 0.
    IntVector d = primitive_direction(verdict.futaki);
    Rational top = dot(d, P.vertices().front());
    for (const auto& v : P.vertices()) top = std::max(top, dot(d, v));
    Point minus_d = Rational(-1) * to_point(d);
    PLConvexFunction f = PLConvexFunction::affine({minus_d, top});
    verdict.status = StabilityStatus::kUnstable;
    verdict.witness = f;
    verdict.witness_L = -dot(d, verdict.futaki);
    verdict.witness_is_linear = true;
    if (!options.scan_when_futaki_nonzero) return verdict;
  }

  const auto directions = primitive_directions(P.dim(), resolution);
  std::vector<std::vector<CreaseValue>> per_direction(directions.size());
  std::vector<std::size_t> counts(directions.size(), 0);
  parallel_for(directions.size(), [&](std::size_t k) {
    const auto& a = directions[k];
    Rational lo = dot(a, P.vertices().front()), hi = lo;
    for (const auto& v : P.vertices()) {
      Rational s = dot(a, v);
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    auto& local = per_direction[k];
    for (const auto& c : farey_offsets(lo, hi, resolution)) {
      local.push_back(evaluate_crease(P, sigma, A, a, c));
      ++counts[k];
      std::sort(local.begin(), local.end(), crease_less);
      if (local.size() > options.keep) local.pop_back();
    }
  });

  for (std::size_t k = 0; k < directions.size(); ++k) {
    verdict.creases_examined += counts[k];
    verdict.best.insert(verdict.best.end(), per_direction[k].begin(), per_direction[k].end());
  }
  std::sort(verdict.best.begin(), verdict.best.end(), crease_less);
  if (verdict.best.size() > options.keep) verdict.best.resize(options.keep);

  if (linear_obstruction || verdict.best.empty()) return verdict;
  const auto& top = verdict.best.front();
  if (top.L < 0) {
    verdict.status = StabilityStatus::kUnstable;
  } else if (top.L == 0) {
    verdict.status = StabilityStatus::kSemistableBoundary;
  } else {
    verdict.status = StabilityStatus::kStableAtResolution;
  }
  if (verdict.status != StabilityStatus::kStableAtResolution) {
    verdict.witness = top.function();
    verdict.witness_L = top.L;
  }
  return verdict;
}

TestConfiguration test_configuration(const Polytope& P, const PLConvexFunction& f_in) {
  PLConvexFunction f = f_in.canonical(P);
  const std::size_t n = static_cast<std::size_t>(P.dim());
  Rational top = f(P.vertices().front());
  for (const auto& v : P.vertices()) top = std::max(top, f(v));
  top += 1;

  std::vector<Facet> facets;
  for (const auto& g : P.facets()) {
    Facet h = g;
    h.normal.push_back(0);
    facets.push_back(h);
  }
  int next_tag = static_cast<int>(P.tag_count());
  for (const auto& piece : f.pieces()) {
    // y - <a,x> >= b
    Point normal = Rational(-1) * piece.gradient;
    normal.push_back(1);
    IntVector prim = primitive_direction(normal);
    Facet h;
    h.offset = piece.constant * Rational(prim[n]);  // normal[n] == 1
    h.normal = prim;
    h.tag = next_tag++;
    facets.push_back(h);
  }
  Facet lid;
  lid.normal = IntVector(n + 1, 0);
  lid.normal[n] = -1;
  lid.offset = -top;
  lid.tag = next_tag;
  facets.push_back(lid);

  TestConfiguration tc{Polytope::from_facets(static_cast<int>(n) + 1, facets), top, {}, f};
  for (auto& cell : f.cells(P))
    if (cell) tc.cells.push_back(*cell);
  return tc;
}

}  // namespace toric
