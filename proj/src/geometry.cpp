#include "toric/geometry.hpp"

#include "toric/parallel.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace toric {
namespace {

std::string describe(const std::vector<double>& x) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ')';
  return os.str();
}

bool positive_definite(const SmallMatrix& H) {
  if (H.rows() == 1) return H(0, 0) > 0;
  return H(0, 0) > 0 && H(0, 0) * H(1, 1) - H(0, 1) * H(1, 0) > 0;
}

// Weights of the three-point second difference at x_i.
std::array<double, 3> second_difference(const GradedMesh1D& m, std::size_t i) {
  const double hm = m.gap(i - 1), hp = m.gap(i);
  return {2.0 / (hm * (hm + hp)), -2.0 / (hm * hp), 2.0 / (hp * (hm + hp))};
}

// Three-point first difference, exact on quadratics.
std::array<double, 3> first_difference(const GradedMesh1D& m, std::size_t i) {
  const double hm = m.gap(i - 1), hp = m.gap(i);
  return {-hp / (hm * (hm + hp)), (hp - hm) / (hm * hp), hm / (hp * (hm + hp))};
}

std::vector<double> as_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

ConvexityError::ConvexityError(std::size_t node_, std::vector<double> location_)
    : std::runtime_error("Hessian not positive definite at node " + std::to_string(node_) + " x = " +
                         describe(location_)),
      node(node_),
      location(std::move(location_)) {}

ReferencePotential::ReferencePotential(const Polytope& P, const BoundaryMeasure& sigma) {
  sigma.validate(P);
  for (const auto& f : P.facets()) {
    Term t;
    t.normal.resize(P.dim());
    for (int i = 0; i < P.dim(); ++i) t.normal(i) = static_cast<double>(f.normal[static_cast<std::size_t>(i)]);
    t.offset = to_double(f.offset);
    t.weight = to_double(sigma.weight(f.tag));
    terms_.push_back(t);
  }
}

double ReferencePotential::value(const Eigen::VectorXd& x) const {
  double v = 0;
  for (const auto& t : terms_) {
    const double l = ell(t, x);
    if (l < 0) throw GeometryError("reference potential evaluated outside the polytope");
    if (l > 0) v += l * std::log(l) / t.weight;
  }
  return v;
}

Eigen::VectorXd ReferencePotential::gradient(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
  for (const auto& t : terms_) {
    const double l = ell(t, x);
    if (!(l > 0)) throw GeometryError("reference gradient needs an interior point");
    g += t.normal * ((std::log(l) + 1.0) / t.weight);
  }
  return g;
}

Eigen::MatrixXd ReferencePotential::hessian(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(x.size(), x.size());
  for (const auto& t : terms_) {
    const double l = ell(t, x);
    if (!(l > 0)) throw GeometryError("reference Hessian needs an interior point");
    H += t.normal * t.normal.transpose() / (t.weight * l);
  }
  return H;
}

Eigen::MatrixXd ReferencePotential::regular_hessian(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(x.size(), x.size());
  for (const auto& t : terms_) {
    const double l = ell(t, x);
    if (l > 0) H += t.normal * t.normal.transpose() / (t.weight * l);
  }
  return H;
}

PotentialGrid::PotentialGrid(const Polytope& P, const BoundaryMeasure& sigma, const MeshParams& mesh,
                             Reference reference)
    : P_(P), sigma_(sigma), u0_(P, sigma), kind_(reference), delzant_(is_delzant(P)) {
  const int n = P.dim();
  if (n != 1 && n != 2) throw GeometryError("potential grids support dimensions 1 and 2 only");
  if (P.facets().size() != static_cast<std::size_t>(2 * n))
    throw GeometryError("potential grids need an interval or an axis-parallel rectangle");
  const auto dn = static_cast<std::size_t>(n);
  lo_.assign(dn, 0);
  hi_.assign(dn, 0);
  w_lo_.assign(dn, 0);
  w_hi_.assign(dn, 0);
  std::vector<int> seen(2 * dn, 0);
  for (const auto& f : P.facets()) {
    int axis = -1, s = 0;
    for (std::size_t i = 0; i < dn; ++i) {
      if (f.normal[i] == 0) continue;
      if (axis >= 0 || (f.normal[i] != 1 && f.normal[i] != -1))
        throw GeometryError("potential grids need an interval or an axis-parallel rectangle");
      axis = static_cast<int>(i);
      s = static_cast<int>(f.normal[i]);
    }
    const auto a = static_cast<std::size_t>(axis);
    const double w = to_double(sigma.weight(f.tag));
    if (s > 0) {
      lo_[a] = to_double(f.offset);
      w_lo_[a] = w;
      ++seen[2 * a];
    } else {
      hi_[a] = -to_double(f.offset);
      w_hi_[a] = w;
      ++seen[2 * a + 1];
    }
  }
  for (int c : seen)
    if (c != 1) throw GeometryError("potential grids need an interval or an axis-parallel rectangle");
  A_ = to_double(measures(P, sigma).A);
  std::size_t total = 1;
  for (std::size_t a = 0; a < dn; ++a) {
    axes_.emplace_back(lo_[a], hi_[a], mesh);
    total *= axes_.back().size();
  }
  phi_.assign(total, 0.0);
}

std::size_t PotentialGrid::index(const std::array<std::size_t, 2>& ij) const {
  if (dim() == 1) return ij[0];
  return ij[0] * axes_[1].size() + ij[1];
}

std::array<std::size_t, 2> PotentialGrid::multi_index(std::size_t node) const {
  if (dim() == 1) return {node, 0};
  return {node / axes_[1].size(), node % axes_[1].size()};
}

Eigen::VectorXd PotentialGrid::point(std::size_t node) const {
  auto ij = multi_index(node);
  Eigen::VectorXd x(dim());
  for (int a = 0; a < dim(); ++a) x(a) = axes_[static_cast<std::size_t>(a)][ij[static_cast<std::size_t>(a)]];
  return x;
}

std::size_t PotentialGrid::layer(std::size_t node) const {
  auto ij = multi_index(node);
  std::size_t l = axes_[0].layer(ij[0]);
  if (dim() == 2) l = std::min(l, axes_[1].layer(ij[1]));
  return l;
}

double PotentialGrid::mass(std::size_t node) const {
  auto ij = multi_index(node);
  double m = axes_[0].mass(ij[0]);
  if (dim() == 2) m *= axes_[1].mass(ij[1]);
  return m;
}

double PotentialGrid::u(std::size_t node) const {
  if (kind_ == Reference::kNone) return phi_[node];
  return u0_.value(point(node)) + phi_[node];
}

SmallMatrix PotentialGrid::reference_hessian(std::size_t node) const {
  if (kind_ == Reference::kNone) return SmallMatrix::Zero(dim(), dim());
  return u0_.hessian(point(node));
}

SmallMatrix PotentialGrid::hessian(std::size_t node) const {
  SmallMatrix H = reference_hessian(node);
  for (const auto& e : hessian_stencil(*this, node)) {
    const double v = e.coeff * phi_[e.index];
    H(e.a, e.b) += v;
    if (e.a != e.b) H(e.b, e.a) += v;
  }
  return H;
}

SmallVector PotentialGrid::gradient(std::size_t node) const {
  if (!is_interior(node)) throw GeometryError("gradient needs an interior node");
  SmallVector g = SmallVector::Zero(dim());
  if (kind_ == Reference::kGuillemin) g = u0_.gradient(point(node));
  auto ij = multi_index(node);
  for (int a = 0; a < dim(); ++a) {
    const auto ua = static_cast<std::size_t>(a);
    auto w = first_difference(axes_[ua], ij[ua]);
    for (int s = -1; s <= 1; ++s) {
      auto nb = ij;
      nb[ua] = ij[ua] + static_cast<std::size_t>(s);
      g(a) += w[static_cast<std::size_t>(s + 1)] * phi_[index(nb)];
    }
  }
  return g;
}

std::vector<StencilEntry> hessian_stencil(const PotentialGrid& g, std::size_t node) {
  if (!g.is_interior(node)) throw GeometryError("Hessian stencil needs an interior node");
  std::vector<StencilEntry> out;
  auto ij = g.multi_index(node);
  for (int a = 0; a < g.dim(); ++a) {
    const auto ua = static_cast<std::size_t>(a);
    auto w = second_difference(g.axis(a), ij[ua]);
    for (int s = -1; s <= 1; ++s) {
      auto nb = ij;
      nb[ua] = ij[ua] + static_cast<std::size_t>(s);
      out.push_back({a, a, g.index(nb), w[static_cast<std::size_t>(s + 1)]});
    }
  }
  if (g.dim() == 2) {
    const auto& X = g.axis(0);
    const auto& Y = g.axis(1);
    const std::size_t i = ij[0], j = ij[1];
    const double c = 1.0 / ((X[i + 1] - X[i - 1]) * (Y[j + 1] - Y[j - 1]));
    out.push_back({0, 1, g.index({i + 1, j + 1}), c});
    out.push_back({0, 1, g.index({i + 1, j - 1}), -c});
    out.push_back({0, 1, g.index({i - 1, j + 1}), -c});
    out.push_back({0, 1, g.index({i - 1, j - 1}), c});
  }
  return out;
}

int normal_axis(const PotentialGrid& g, std::size_t node) {
  if (g.dim() != 2) throw GeometryError("tangential data needs a two-dimensional grid");
  auto ij = g.multi_index(node);
  const bool bx = g.axis(0).layer(ij[0]) == 0, by = g.axis(1).layer(ij[1]) == 0;
  if (bx == by) throw GeometryError("node is not in the relative interior of a facet");
  return bx ? 0 : 1;
}

std::vector<StencilEntry> tangential_stencil(const PotentialGrid& g, std::size_t node) {
  const int t = 1 - normal_axis(g, node);
  const auto ut = static_cast<std::size_t>(t);
  auto ij = g.multi_index(node);
  auto w = second_difference(g.axis(t), ij[ut]);
  std::vector<StencilEntry> out;
  for (int s = -1; s <= 1; ++s) {
    auto nb = ij;
    nb[ut] = ij[ut] + static_cast<std::size_t>(s);
    out.push_back({t, t, g.index(nb), w[static_cast<std::size_t>(s + 1)]});
  }
  return out;
}

double tangential_hessian(const PotentialGrid& g, std::size_t node) {
  const int t = 1 - normal_axis(g, node);
  double h = 0;
  if (g.reference_kind() == Reference::kGuillemin) h = g.reference().regular_hessian(g.point(node))(t, t);
  for (const auto& e : tangential_stencil(g, node)) h += e.coeff * g.phi()[e.index];
  return h;
}

std::vector<SmallMatrix> inverse_hessian_field(const PotentialGrid& g) {
  std::vector<SmallMatrix> Q(g.size(), SmallMatrix::Zero(g.dim(), g.dim()));
  std::vector<char> bad(g.size(), 0);
  parallel_for(g.size(), [&](std::size_t k) {
    if (!g.is_interior(k)) return;
    SmallMatrix H = g.hessian(k);
    if (!positive_definite(H)) {
      bad[k] = 1;
      return;
    }
    Q[k] = H.inverse();
  });
  for (std::size_t k = 0; k < g.size(); ++k)
    if (bad[k]) throw ConvexityError(k, as_std(g.point(k)));
  return Q;
}

namespace {

double divergence_at(const PotentialGrid& g, const std::vector<SmallMatrix>& Q, std::size_t node) {
  double s = 0;
  for (const auto& e : hessian_stencil(g, node)) {
    const double f = e.a == e.b ? 1.0 : 2.0;
    s += f * e.coeff * Q[e.index](e.a, e.b);
  }
  return s;
}

}  // namespace

MetricSample abreu_S(const PotentialGrid& g, std::size_t node) {
  if (g.layer(node) < 2) throw std::invalid_argument("abreu_S needs a node at least two layers inside");
  std::vector<SmallMatrix> Q(g.size(), SmallMatrix::Zero(g.dim(), g.dim()));
  for (const auto& e : hessian_stencil(g, node)) {
    if (Q[e.index].squaredNorm() > 0) continue;
    SmallMatrix H = g.hessian(e.index);
    if (!positive_definite(H)) throw ConvexityError(e.index, as_std(g.point(e.index)));
    Q[e.index] = H.inverse();
  }
  MetricSample m;
  m.x = g.point(node);
  m.G_xx = g.hessian(node);
  m.G_thetatheta = Q[node];
  m.S = -0.5 * divergence_at(g, Q, node);
  return m;
}

Eigen::VectorXd abreu_residual(const PotentialGrid& g) {
  auto Q = inverse_hessian_field(g);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.size()));
  parallel_for(g.size(), [&](std::size_t k) {
    if (g.is_interior(k)) r(static_cast<Eigen::Index>(k)) = divergence_at(g, Q, k) + g.A();
  });
  return r;
}

LegendrePoint legendre(const PotentialGrid& g, std::size_t node) {
  SmallMatrix H = g.hessian(node);
  if (!positive_definite(H)) throw ConvexityError(node, as_std(g.point(node)));
  Eigen::VectorXd y = g.gradient(node);
  Eigen::VectorXd x = g.point(node);
  return {x.dot(y) - g.u(node), y};
}

PotentialGrid guillemin(const Polytope& P, const BoundaryMeasure& sigma, const MeshParams& mesh) {
  return PotentialGrid(P, sigma, mesh, Reference::kGuillemin);
}

void write_grid_csv(std::ostream& os, const PotentialGrid& g) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::array<double, 5>> rows(g.size());
  parallel_for(g.size(), [&](std::size_t k) {
    Eigen::VectorXd x = g.point(k);
    double det = nan, S = nan;
    if (g.is_interior(k)) det = g.hessian(k).determinant();
    if (g.layer(k) >= 2) {
      try {
        S = abreu_S(g, k).S;
      } catch (const ConvexityError&) {
      }
    }
    rows[k] = {x(0), g.dim() == 2 ? x(1) : 0.0, g.u(k), det, S};
  });
  os << "x1,x2,u,det_hessian,S\n" << std::setprecision(17);
  for (const auto& r : rows) os << r[0] << ',' << r[1] << ',' << r[2] << ',' << r[3] << ',' << r[4] << '\n';
}

}  // namespace toric
