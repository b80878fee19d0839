// Discrete Mabuchi energy on a potential grid (internal to the solver).
//
//   F_h(phi) = const - Σ_t m_t log det(H0_t + H_t phi) / det(H0_t) + Σ_k l_k phi_k
//
// Terms t are the interior nodes (full Hessian) and the boundary nodes lying on
// a single facet (tangential second derivative only; the normal direction is
// singular and carried by the constant). l is the trapezoid rule for
// ∫_∂P · dσ − A ∫_P · dμ. Its Euler-Lagrange equation at interior node k is
// m_k (Σ_ab D_ab u^{ab} + A) = 0 with u^{ab} extended by zero normal
// components, so stationary points are discrete constant scalar curvature
// potentials.
#pragma once

#include "toric/geometry.hpp"

#include <Eigen/Sparse>

#include <vector>

namespace toric::detail {

struct EnergyTerm {
  std::size_t node;
  double weight;
  SmallMatrix H0;
  double log_det_H0;
  std::vector<std::size_t> nodes;
  std::vector<SmallMatrix> C;  // ∂(H phi)/∂phi[nodes[l]]
  bool tangential;
};

class DiscreteEnergy {
 public:
  explicit DiscreteEnergy(const PotentialGrid& g);

  /// +infinity outside the convex cone.
  double value(const std::vector<double>& phi) const;
  /// Throws ConvexityError outside the cone.
  Eigen::VectorXd gradient(const std::vector<double>& phi) const;
  Eigen::SparseMatrix<double> hessian(const std::vector<double>& phi) const;

  /// Trapezoid value of ∫_∂P f dσ − A ∫_P f dμ for nodal values f.
  double linear_part(const std::vector<double>& f) const;
  const Eigen::VectorXd& linear_weights() const { return ell_; }
  /// -∫_P log det Hess(u0) dμ + L(u0), in closed form.
  double constant() const { return constant_; }
  const std::vector<EnergyTerm>& terms() const { return terms_; }

  /// u^{ab} (tangential entry for boundary terms) at every term.
  std::vector<SmallMatrix> inverses(const std::vector<double>& phi) const;

 private:
  const PotentialGrid& g_;
  std::vector<EnergyTerm> terms_;
  Eigen::VectorXd ell_;
  double constant_ = 0;

  SmallMatrix local_hessian(const EnergyTerm& t, const std::vector<double>& phi) const;
};

/// Trapezoid weights of L on the grid (same as DiscreteEnergy::linear_weights).
Eigen::VectorXd boundary_minus_interior_weights(const PotentialGrid& g);

}  // namespace toric::detail
