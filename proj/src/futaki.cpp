#include "toric/futaki.hpp"

#include "toric/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace toric {
namespace {

struct Box {
  std::vector<std::int64_t> lo, hi;
};

Box scaled_box(const Polytope& P, int k) {
  if (!P.has_integral_vertices())
    throw std::invalid_argument(
        "lattice counting needs integral vertices; scale the polarisation (multiply the polytope by a common "
        "denominator)");
  const auto n = static_cast<std::size_t>(P.dim());
  Box b{std::vector<std::int64_t>(n), std::vector<std::int64_t>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    Integer lo = numerator(P.vertices().front()[i]), hi = lo;
    for (const auto& v : P.vertices()) {
      lo = std::min(lo, Integer(numerator(v[i])));
      hi = std::max(hi, Integer(numerator(v[i])));
    }
    b.lo[i] = (lo * k).convert_to<std::int64_t>();
    b.hi[i] = (hi * k).convert_to<std::int64_t>();
  }
  return b;
}

// Facets with integer offsets scaled by k: <nu, m> >= k c. For integral P
// every offset is an integer.
struct ScaledFacet {
  IntVector normal;
  std::int64_t bound;
};

std::vector<ScaledFacet> scaled_facets(const Polytope& P, int k) {
  std::vector<ScaledFacet> out;
  for (const auto& f : P.facets()) {
    Integer c = ceil_rational(f.offset * k);
    out.push_back({f.normal, c.convert_to<std::int64_t>()});
  }
  return out;
}

// Scans the slab with first coordinate fixed to x0.
void scan_slab(const Box& box, const std::vector<ScaledFacet>& facets, std::int64_t x0,
               const std::function<void(const IntVector&)>& visit) {
  const std::size_t n = box.lo.size();
  IntVector m(n);
  m[0] = x0;
  for (std::size_t i = 1; i < n; ++i) m[i] = box.lo[i];
  while (true) {
    bool inside = true;
    for (const auto& f : facets) {
      std::int64_t s = 0;
      for (std::size_t i = 0; i < n; ++i) s += f.normal[i] * m[i];
      if (s < f.bound) {
        inside = false;
        break;
      }
    }
    if (inside) visit(m);
    std::size_t i = 1;
    while (i < n && m[i] == box.hi[i]) {
      m[i] = box.lo[i];
      ++i;
    }
    if (i >= n) break;
    ++m[i];
  }
}

}  // namespace

void for_each_lattice_point(const Polytope& P, int k, const std::function<void(const IntVector&)>& visit) {
  if (k < 1) throw std::invalid_argument("k must be positive");
  auto box = scaled_box(P, k);
  auto facets = scaled_facets(P, k);
  for (std::int64_t x = box.lo[0]; x <= box.hi[0]; ++x) scan_slab(box, facets, x, visit);
}

Integer lattice_point_count(const Polytope& P, int k) {
  Integer count = 0;
  for_each_lattice_point(P, k, [&](const IntVector&) { ++count; });
  return count;
}

WeightData count_and_weigh(const Polytope& P, const IntVector& xi, int k) {
  if (k < 1) throw std::invalid_argument("k must be positive");
  if (xi.size() != static_cast<std::size_t>(P.dim())) throw std::invalid_argument("xi has wrong dimension");
  auto box = scaled_box(P, k);
  auto facets = scaled_facets(P, k);
  const auto slabs = static_cast<std::size_t>(box.hi[0] - box.lo[0] + 1);
  std::vector<std::int64_t> counts(slabs, 0), weights(slabs, 0);
  parallel_for(slabs, [&](std::size_t s) {
    scan_slab(box, facets, box.lo[0] + static_cast<std::int64_t>(s), [&](const IntVector& m) {
      ++counts[s];
      for (std::size_t i = 0; i < m.size(); ++i) weights[s] += xi[i] * m[i];
    });
  });
  WeightData wd;
  wd.k = k;
  wd.d_k = 0;
  wd.w_k = 0;
  for (std::size_t s = 0; s < slabs; ++s) {
    wd.d_k += counts[s];
    wd.w_k += weights[s];
  }
  wd.F_k = Rational(wd.w_k, wd.d_k * k);
  return wd;
}

ExpansionFit expansion(const Polytope& P, const IntVector& xi, int k_min, int k_max) {
  if (k_min < 1 || k_max - k_min < 3) throw std::invalid_argument("expansion needs k_min >= 1 and k_max - k_min >= 3");
  const int rows = k_max - k_min + 1;
  Eigen::MatrixXd X(rows, 3);
  Eigen::VectorXd y(rows);
  for (int k = k_min; k <= k_max; ++k) {
    const double inv = 1.0 / k;
    X.row(k - k_min) << 1.0, inv, inv * inv;
    y(k - k_min) = to_double(count_and_weigh(P, xi, k).F_k);
  }
  Eigen::Vector3d c = X.colPivHouseholderQr().solve(y);
  ExpansionFit fit;
  fit.F0 = c(0);
  fit.F1 = c(1);
  fit.F2 = c(2);
  fit.residual = std::sqrt((X * c - y).squaredNorm() / rows);
  fit.k_min = k_min;
  fit.k_max = k_max;
  return fit;
}

std::vector<Rational> interpolate_polynomial(int k_first, const std::vector<Rational>& values) {
  const std::size_t m = values.size();
  std::vector<Point> M(m, Point(m + 1));
  for (std::size_t i = 0; i < m; ++i) {
    Rational k = k_first + static_cast<int>(i), p = 1;
    for (std::size_t j = 0; j < m; ++j, p *= k) M[i][j] = p;
    M[i][m] = values[i];
  }
  for (std::size_t c = 0; c < m; ++c) {
    std::size_t r = c;
    while (M[r][c] == 0) ++r;
    std::swap(M[r], M[c]);
    Rational inv = 1 / M[c][c];
    for (auto& x : M[c]) x *= inv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == c || M[i][c] == 0) continue;
      Rational f = M[i][c];
      for (std::size_t j = c; j <= m; ++j) M[i][j] -= f * M[c][j];
    }
  }
  std::vector<Rational> coeffs(m);
  for (std::size_t i = 0; i < m; ++i) coeffs[i] = M[i][m];
  while (coeffs.size() > 1 && coeffs.back() == 0) coeffs.pop_back();
  return coeffs;
}

Rational evaluate_polynomial(const std::vector<Rational>& coefficients, const Rational& k) {
  Rational v = 0;
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) v = v * k + *it;
  return v;
}

ExactExpansion exact_expansion(const Polytope& P, const IntVector& xi) {
  const int n = P.dim();
  std::vector<Rational> d, w;
  for (int k = 1; k <= n + 2; ++k) {
    auto wd = count_and_weigh(P, xi, k);
    d.emplace_back(wd.d_k);
    w.emplace_back(wd.w_k);
  }
  ExactExpansion e;
  e.d_poly = interpolate_polynomial(1, d);
  e.w_poly = interpolate_polynomial(1, w);
  const auto nn = static_cast<std::size_t>(n);
  auto coeff = [](const std::vector<Rational>& p, std::size_t j) { return j < p.size() ? p[j] : Rational(0); };
  const Rational a_n = coeff(e.d_poly, nn), a_n1 = coeff(e.d_poly, nn - 1);
  const Rational b_n1 = coeff(e.w_poly, nn + 1), b_n = coeff(e.w_poly, nn);
  e.F0 = b_n1 / a_n;
  e.F1 = (b_n - e.F0 * a_n1) / a_n;
  return e;
}

FiltrationValue filtration_futaki(const Polytope& P, const PLConvexFunction& f, int k) {
  if (k < 1) throw std::invalid_argument("k must be positive");
  Rational lowest = f(P.vertices().front());
  // The minimum sits at a vertex of one of the cells.
  for (const auto& cell : f.cells(P))
    if (cell)
      for (const auto& v : cell->vertices()) lowest = std::min(lowest, f(v));
  FiltrationValue out;
  out.shift = lowest < 0 ? Rational(-lowest) : Rational(0);

  const auto& pieces = f.pieces();
  out.d_k = 0;
  out.weight = 0;
  const Rational kk = k;
  for_each_lattice_point(P, k, [&](const IntVector& m) {
    // k f(m/k) = max_i (<a_i, m> + k b_i)
    Rational best;
    bool first = true;
    for (const auto& p : pieces) {
      Rational v = dot(m, p.gradient) + kk * (p.constant + out.shift);
      if (first || v > best) best = v;
      first = false;
    }
    ++out.d_k;
    out.weight += ceil_rational(best);
  });
  auto [vol, c] = volume_and_centroid(P);
  (void)c;
  Rational mean = (integral(P, f) + out.shift * vol) / vol;
  out.value = kk * (Rational(out.weight, out.d_k * k) - mean);
  return out;
}

double richardson(double s_k, double s_2k) { return 2.0 * s_2k - s_k; }

}  // namespace toric
