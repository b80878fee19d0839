#include "energy.hpp"

#include "toric/parallel.hpp"

#include <cmath>
#include <limits>
#include <map>

namespace toric::detail {
namespace {

bool positive_definite(const SmallMatrix& H) {
  if (H.rows() == 1) return H(0, 0) > 0;
  return H(0, 0) > 0 && H(0, 0) * H(1, 1) - H(0, 1) * H(1, 0) > 0;
}

// log det(H0 + X) - log det(H0), accurate when X is small against H0.
double log_det_ratio(const SmallMatrix& H0, const SmallMatrix& X) {
  if (H0.rows() == 1) return std::log1p(X(0, 0) / H0(0, 0));
  SmallMatrix M = H0.inverse() * X;
  return std::log1p(M.trace() + M.determinant());
}

// Neumaier compensated sum.
double accurate_sum(const std::vector<double>& v) {
  double s = 0, c = 0;
  for (double x : v) {
    const double t = s + x;
    c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  return s + c;
}

double log_det(const SmallMatrix& H) {
  if (H.rows() == 1) return std::log(H(0, 0));
  return std::log(H(0, 0) * H(1, 1) - H(0, 1) * H(1, 0));
}

// ∫_0^L log(alpha + beta s) ds
double log_linear_integral(double alpha, double beta, double L) {
  if (beta == 0) return L * std::log(alpha);
  const double b = alpha + beta * L;
  return (b * std::log(b) - alpha * std::log(alpha)) / beta - L;
}

struct AxisData {
  double L, w_lo, w_hi;
  // ∫ log u0'' over the axis
  double log_hessian_integral() const {
    return log_linear_integral(w_hi * L, w_lo - w_hi, L) - L * std::log(w_lo * w_hi) - 2.0 * (L * std::log(L) - L);
  }
  // Axis part of u0 at either end and its integral.
  double at_lo() const { return L * std::log(L) / w_hi; }
  double at_hi() const { return L * std::log(L) / w_lo; }
  double integral() const { return (1.0 / w_lo + 1.0 / w_hi) * (0.5 * L * L * std::log(L) - 0.25 * L * L); }
};

AxisData axis_data(const PotentialGrid& g, int a) {
  return {g.upper(a) - g.lower(a), g.weight_lower(a), g.weight_upper(a)};
}

double closed_form_constant(const PotentialGrid& g) {
  const double A = g.A();
  if (g.dim() == 1) {
    auto X = axis_data(g, 0);
    const double L_u0 = X.w_lo * X.at_lo() + X.w_hi * X.at_hi() - A * X.integral();
    return -X.log_hessian_integral() + L_u0;
  }
  auto X = axis_data(g, 0), Y = axis_data(g, 1);
  const double log_det = Y.L * X.log_hessian_integral() + X.L * Y.log_hessian_integral();
  const double boundary = X.w_lo * (Y.L * X.at_lo() + Y.integral()) + X.w_hi * (Y.L * X.at_hi() + Y.integral()) +
                          Y.w_lo * (X.L * Y.at_lo() + X.integral()) + Y.w_hi * (X.L * Y.at_hi() + X.integral());
  const double interior = Y.L * X.integral() + X.L * Y.integral();
  return -log_det + boundary - A * interior;
}

}  // namespace

Eigen::VectorXd boundary_minus_interior_weights(const PotentialGrid& g) {
  Eigen::VectorXd ell(static_cast<Eigen::Index>(g.size()));
  for (std::size_t k = 0; k < g.size(); ++k) {
    auto ij = g.multi_index(k);
    double b = 0;
    for (int a = 0; a < g.dim(); ++a) {
      const auto& ax = g.axis(a);
      const std::size_t i = ij[static_cast<std::size_t>(a)];
      if (i != 0 && i + 1 != ax.size()) continue;
      const double w = i == 0 ? g.weight_lower(a) : g.weight_upper(a);
      double along = 1.0;
      if (g.dim() == 2) along = g.axis(1 - a).mass(ij[static_cast<std::size_t>(1 - a)]);
      b += w * along;
    }
    ell(static_cast<Eigen::Index>(k)) = b - g.A() * g.mass(k);
  }
  return ell;
}

DiscreteEnergy::DiscreteEnergy(const PotentialGrid& g) : g_(g) {
  if (g.reference_kind() != Reference::kGuillemin)
    throw std::invalid_argument("the Mabuchi energy needs a grid with the reference potential");
  for (std::size_t k = 0; k < g.size(); ++k) {
    EnergyTerm t;
    t.node = k;
    t.weight = g.mass(k);
    std::vector<StencilEntry> st;
    if (g.is_interior(k)) {
      t.tangential = false;
      t.H0 = g.reference_hessian(k);
      st = hessian_stencil(g, k);
    } else if (g.dim() == 2) {
      auto ij = g.multi_index(k);
      const bool corner = g.axis(0).layer(ij[0]) == 0 && g.axis(1).layer(ij[1]) == 0;
      if (corner) continue;
      t.tangential = true;
      const int tang = 1 - normal_axis(g, k);
      t.H0 = SmallMatrix::Constant(1, 1, g.reference().regular_hessian(g.point(k))(tang, tang));
      st = tangential_stencil(g, k);
      for (auto& e : st) e.a = e.b = 0;
    } else {
      continue;
    }
    t.log_det_H0 = log_det(t.H0);
    std::map<std::size_t, SmallMatrix> by_node;
    const auto d = t.H0.rows();
    for (const auto& e : st) {
      auto [it, fresh] = by_node.try_emplace(e.index, SmallMatrix::Zero(d, d));
      (void)fresh;
      it->second(e.a, e.b) += e.coeff;
      if (e.a != e.b) it->second(e.b, e.a) += e.coeff;
    }
    for (auto& [node, C] : by_node) {
      t.nodes.push_back(node);
      t.C.push_back(C);
    }
    terms_.push_back(std::move(t));
  }
  ell_ = boundary_minus_interior_weights(g);
  constant_ = closed_form_constant(g);
}

SmallMatrix DiscreteEnergy::local_hessian(const EnergyTerm& t, const std::vector<double>& phi) const {
  SmallMatrix H = t.H0;
  for (std::size_t l = 0; l < t.nodes.size(); ++l) H += phi[t.nodes[l]] * t.C[l];
  return H;
}

double DiscreteEnergy::linear_part(const std::vector<double>& f) const {
  return ell_.dot(Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size())));
}

double DiscreteEnergy::value(const std::vector<double>& phi) const {
  std::vector<double> parts(terms_.size());
  std::vector<char> bad(terms_.size(), 0);
  parallel_for(terms_.size(), [&](std::size_t i) {
    const auto& t = terms_[i];
    SmallMatrix H = local_hessian(t, phi);
    if (!positive_definite(H)) {
      bad[i] = 1;
      return;
    }
    parts[i] = -t.weight * log_det_ratio(t.H0, H - t.H0);
  });
  for (std::size_t i = 0; i < terms_.size(); ++i)
    if (bad[i]) return std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < phi.size(); ++k) parts.push_back(ell_(static_cast<Eigen::Index>(k)) * phi[k]);
  parts.push_back(constant_);
  return accurate_sum(parts);
}

std::vector<SmallMatrix> DiscreteEnergy::inverses(const std::vector<double>& phi) const {
  std::vector<SmallMatrix> Q(terms_.size());
  std::vector<char> bad(terms_.size(), 0);
  parallel_for(terms_.size(), [&](std::size_t i) {
    SmallMatrix H = local_hessian(terms_[i], phi);
    if (!positive_definite(H)) {
      bad[i] = 1;
      return;
    }
    Q[i] = H.inverse();
  });
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (!bad[i]) continue;
    Eigen::VectorXd x = g_.point(terms_[i].node);
    throw ConvexityError(terms_[i].node, {x.data(), x.data() + x.size()});
  }
  return Q;
}

Eigen::VectorXd DiscreteEnergy::gradient(const std::vector<double>& phi) const {
  auto Q = inverses(phi);
  Eigen::VectorXd grad = ell_;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const auto& t = terms_[i];
    for (std::size_t l = 0; l < t.nodes.size(); ++l)
      grad(static_cast<Eigen::Index>(t.nodes[l])) -= t.weight * Q[i].cwiseProduct(t.C[l]).sum();
  }
  return grad;
}

Eigen::SparseMatrix<double> DiscreteEnergy::hessian(const std::vector<double>& phi) const {
  auto Q = inverses(phi);
  std::vector<std::vector<Eigen::Triplet<double>>> local(terms_.size());
  parallel_for(terms_.size(), [&](std::size_t i) {
    const auto& t = terms_[i];
    std::vector<SmallMatrix> QC(t.nodes.size());
    for (std::size_t l = 0; l < t.nodes.size(); ++l) QC[l] = Q[i] * t.C[l];
    for (std::size_t k = 0; k < t.nodes.size(); ++k)
      for (std::size_t l = 0; l < t.nodes.size(); ++l) {
        // d^2/dphi_k dphi_l of -log det H = tr(Q C_k Q C_l)
        const double v = t.weight * (QC[k] * QC[l]).trace();
        local[i].emplace_back(static_cast<int>(t.nodes[k]), static_cast<int>(t.nodes[l]), v);
      }
  });
  std::vector<Eigen::Triplet<double>> all;
  for (auto& l : local) all.insert(all.end(), l.begin(), l.end());
  const auto n = static_cast<Eigen::Index>(g_.size());
  Eigen::SparseMatrix<double> K(n, n);
  K.setFromTriplets(all.begin(), all.end());
  return K;
}

}  // namespace toric::detail
