// Symplectic potentials u = u0 + phi on box domains, their Hessians, the
// induced torus-invariant metric, and the Abreu operator
//     S = -1/2 Σ_ab ∂_a ∂_b u^{ab}.
// u0 is the canonical reference Σ_k (l_k / w_k) log l_k and is differentiated
// in closed form; phi lives on a graded tensor-product mesh and is
// differentiated by finite differences.
#pragma once

#include "toric/mesh.hpp"
#include "toric/polytope.hpp"

#include <Eigen/Dense>

#include <array>
#include <iosfwd>
#include <stdexcept>
#include <vector>

namespace toric {

using SmallMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 2, 2>;
using SmallVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 2, 1>;

class ConvexityError : public std::runtime_error {
 public:
  ConvexityError(std::size_t node, std::vector<double> location);
  std::size_t node;
  std::vector<double> location;
};

/// u0(x) = Σ_k (l_k(x) / w_k) log l_k(x), l_k = <nu_k, x> - c_k, for any
/// polytope. Derivatives are only defined in the interior.
class ReferencePotential {
 public:
  ReferencePotential(const Polytope& P, const BoundaryMeasure& sigma);

  /// Extends continuously to the boundary (l log l -> 0).
  double value(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const;
  /// Hessian with the facets through x left out: the finite part at a
  /// boundary point, whose tangential block is the facet's own potential.
  Eigen::MatrixXd regular_hessian(const Eigen::VectorXd& x) const;

 private:
  struct Term {
    Eigen::VectorXd normal;
    double offset;
    double weight;
  };
  std::vector<Term> terms_;
  double ell(const Term& t, const Eigen::VectorXd& x) const { return t.normal.dot(x) - t.offset; }
};

enum class Reference {
  kGuillemin,  // u = u0 + phi
  kNone        // u = phi; used to test the stencils on sampled potentials
};

/// phi on the tensor-product mesh of an interval (n = 1) or an axis-parallel
/// rectangle (n = 2). Other shapes throw GeometryError.
class PotentialGrid {
 public:
  PotentialGrid(const Polytope& P, const BoundaryMeasure& sigma, const MeshParams& mesh,
                Reference reference = Reference::kGuillemin);

  int dim() const { return static_cast<int>(axes_.size()); }
  const GradedMesh1D& axis(int a) const { return axes_[static_cast<std::size_t>(a)]; }
  std::size_t size() const { return phi_.size(); }

  std::size_t index(const std::array<std::size_t, 2>& ij) const;
  std::array<std::size_t, 2> multi_index(std::size_t node) const;
  Eigen::VectorXd point(std::size_t node) const;
  /// Cells to the nearest facet (0 on the boundary).
  std::size_t layer(std::size_t node) const;
  bool is_interior(std::size_t node) const { return layer(node) > 0; }
  /// Trapezoid weight of the node in P.
  double mass(std::size_t node) const;

  const Polytope& polytope() const { return P_; }
  const BoundaryMeasure& sigma() const { return sigma_; }
  const ReferencePotential& reference() const { return u0_; }
  Reference reference_kind() const { return kind_; }
  bool delzant() const { return delzant_; }
  double A() const { return A_; }
  /// Bounds and facet weights of the box along axis a.
  double lower(int a) const { return lo_[static_cast<std::size_t>(a)]; }
  double upper(int a) const { return hi_[static_cast<std::size_t>(a)]; }
  double weight_lower(int a) const { return w_lo_[static_cast<std::size_t>(a)]; }
  double weight_upper(int a) const { return w_hi_[static_cast<std::size_t>(a)]; }

  std::vector<double>& phi() { return phi_; }
  const std::vector<double>& phi() const { return phi_; }
  /// Sets phi(x) = f(x) at every node.
  template <class F>
  void sample(F&& f) {
    for (std::size_t k = 0; k < size(); ++k) phi_[k] = f(point(k));
  }

  double u(std::size_t node) const;
  /// Closed-form Hessian of the reference at an interior node (zero for kNone).
  SmallMatrix reference_hessian(std::size_t node) const;
  /// Full Hessian u_ab at an interior node.
  SmallMatrix hessian(std::size_t node) const;
  /// ∇u at an interior node (three-point differences, exact on quadratics).
  SmallVector gradient(std::size_t node) const;

 private:
  Polytope P_;
  BoundaryMeasure sigma_;
  ReferencePotential u0_;
  Reference kind_;
  bool delzant_;
  double A_;
  std::vector<GradedMesh1D> axes_;
  std::vector<double> lo_, hi_, w_lo_, w_hi_;
  std::vector<double> phi_;
};

/// Entry of a linear finite-difference stencil for a Hessian component:
/// (∂_a ∂_b phi)(node) ≈ Σ coeff * phi[index].
struct StencilEntry {
  int a, b;
  std::size_t index;
  double coeff;
};

/// All components (a <= b) of the Hessian stencil at an interior node.
std::vector<StencilEntry> hessian_stencil(const PotentialGrid& g, std::size_t node);
/// Second difference along the facet through a boundary node that lies on
/// exactly one facet (n = 2). Entries have a = b = the tangent axis.
std::vector<StencilEntry> tangential_stencil(const PotentialGrid& g, std::size_t node);
/// The axis normal to the (single) facet through a boundary node.
int normal_axis(const PotentialGrid& g, std::size_t node);

/// Reference plus phi, returning the tangential second derivative at a
/// boundary node on one facet, with the singular facet omitted.
double tangential_hessian(const PotentialGrid& g, std::size_t node);

struct MetricSample {
  Eigen::VectorXd x;
  Eigen::MatrixXd G_xx;          // u_ab
  Eigen::MatrixXd G_thetatheta;  // u^{ab}
  double S = 0;
};

/// S at an interior node at least two layers from the boundary.
MetricSample abreu_S(const PotentialGrid& g, std::size_t node);

/// Σ_ab ∂_a ∂_b u^{ab} + A at every interior node (0 on the boundary), with the
/// boundary limits of u^{ab} that the reference enforces (normal components
/// vanish). Zero exactly for a constant scalar curvature solution.
Eigen::VectorXd abreu_residual(const PotentialGrid& g);

/// u^{ab} at every interior node; throws ConvexityError if u_ab is not
/// positive definite somewhere.
std::vector<SmallMatrix> inverse_hessian_field(const PotentialGrid& g);

struct LegendrePoint {
  double value;       // <x, ∇u> - u
  Eigen::VectorXd y;  // ∇u(x)
};
LegendrePoint legendre(const PotentialGrid& g, std::size_t node);

PotentialGrid guillemin(const Polytope& P, const BoundaryMeasure& sigma, const MeshParams& mesh);

/// CSV with header x1,x2,u,det_hessian,S. Rows cover every node; columns that
/// are undefined at a node (boundary Hessian, S near the boundary) hold nan.
void write_grid_csv(std::ostream& os, const PotentialGrid& g);

}  // namespace toric
