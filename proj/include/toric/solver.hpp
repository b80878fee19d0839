// Minimization of the discrete Mabuchi energy
//     F(u) = -∫_P log det(u_ab) dμ + L(u)
// over u = u0 + phi on a box grid, with the constant scalar curvature equation
// Σ_ab ∂_a ∂_b u^{ab} = -A as its Euler-Lagrange equation, plus ray slopes and
// the integration-by-parts check that certifies a solution.
#pragma once

#include "toric/geometry.hpp"
#include "toric/stability.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace toric {

/// Discrete F at the grid's current phi. Throws ConvexityError outside the
/// convex cone.
double mabuchi(const PotentialGrid& g);

struct IterationRecord {
  int iteration = 0;
  double F = 0;
  double residual = 0;           // sup over interior nodes of |Σ D_ab u^{ab} + A|
  double boundary_residual = 0;  // same equation's boundary rows, per unit weight
  double min_det = 0;            // min det(u_ab) over interior nodes
  std::vector<double> min_det_at;
  double phi_sup = 0;
  double step = 0;  // accepted line-search step
  std::string phase;  // "initial", "descent", "newton"
};

enum class Termination { kConverged, kMaxIterations, kDivergence, kRefusedFutaki, kStalled };
std::string to_string(Termination t);

/// Evidence that F is unbounded below on the grid: phi left the ceiling while
/// F kept decreasing along an asymptotically linear direction.
struct DivergenceCertificate {
  std::vector<double> direction;  // unit d; phi grows like t <d, x>
  double observed_slope = 0;      // dF/dt along the direction
  double predicted_slope = 0;     // L(<d, x>)
  double phi_sup = 0;
  double ceiling = 0;
  /// Exact destabilizer with L < 0 from the stability module.
  std::optional<PLConvexFunction> destabilizer;
  std::optional<Rational> destabilizer_L;
  /// Crease with L < 0 whose nodal values correlate best with phi.
  std::optional<CreaseValue> correlated_crease;
  double correlation = 0;
};

struct SolveOptions {
  double tol = 1e-5;
  int max_iter = 200;
  /// Defaults to 1e3 * diam(P) * A.
  std::optional<double> ceiling;
  /// Refuse when the Futaki vector is nonzero. When false the solver runs
  /// anyway and is expected to end with a divergence certificate.
  bool require_zero_futaki = true;
  double newton_threshold = 1e-2;
  /// Starting phi (defaults to 0).
  std::function<double(const Eigen::VectorXd&)> initial;
  /// Crease resolution used to explain a divergence.
  int crease_resolution = 4;
  /// Called after every accepted iteration.
  std::function<void(const IterationRecord&, const PotentialGrid&)> observer;
};

struct SolveReport {
  std::optional<PotentialGrid> grid;
  Termination termination = Termination::kMaxIterations;
  double residual = 0;
  double boundary_residual = 0;
  std::vector<IterationRecord> history;
  int iterations = 0;
  Point futaki;
  std::optional<DivergenceCertificate> certificate;
  std::string message;
};

SolveReport solve(const Polytope& P, const BoundaryMeasure& sigma, const MeshParams& mesh,
                  const SolveOptions& options = {});

/// phi minus its least-squares affine fit over the nodes.
std::vector<double> remove_affine_part(const PotentialGrid& g, const std::vector<double>& phi);

struct RaySample {
  double s;
  double F;
};
struct RaySlope {
  double slope = 0;  // (F(s_max) - F(s_max / 2)) / (s_max / 2)
  Rational L;        // exact L(f)
  std::vector<RaySample> ladder;
};

/// F(u0 + s f) on s = s_max / 2^j, j = rungs-1..0.
RaySlope ray_slope(const Polytope& P, const BoundaryMeasure& sigma, const Quadratic& f, double s_max,
                   const MeshParams& mesh = MeshParams{257}, int rungs = 8);

/// ∫ Σ u^{ab} f_ab dμ for quadratic f against L(f).
struct IbpCheck {
  double lhs = 0;         // trapezoid value on the grid
  double lhs_coarse = 0;  // same rule on every other node
  double L_discrete = 0;  // trapezoid value of L(f)
  Rational L_exact;
  double quadrature_error = 0;  // |lhs - lhs_coarse|
  bool within(double factor) const;
};
/// Needs an odd node count per axis.
IbpCheck ibp_check(const PotentialGrid& g, const Quadratic& f);

}  // namespace toric
