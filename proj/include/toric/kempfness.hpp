// Finite-dimensional moment-map examples: unordered points on the sphere
// under SO(3), matrices under conjugation, Hilbert-Mumford weights of
// diagonal one-parameter subgroups, and the Kempf-Ness function.
#pragma once

#include "toric/rational.hpp"

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <vector>

namespace toric {

/// Points u_i on the unit sphere with positive multiplicities.
struct SphereConfig {
  std::vector<Eigen::Vector3d> points;
  std::vector<double> multiplicity;  // empty means all 1

  double weight(std::size_t i) const { return multiplicity.empty() ? 1.0 : multiplicity[i]; }
  double total_weight() const;
  /// Throws std::invalid_argument unless every |u_i| = 1 within 1e-12.
  void validate() const;
};

/// Σ m_i u_i.
Eigen::Vector3d sphere_moment(const SphereConfig& c);

enum class SphereVerdict { kBalanced, kDivergesToFixedPoint };
std::string to_string(SphereVerdict v);

/// Antipodal description of a stationary unbalanced configuration: weight r
/// sits at +p and the remaining weight at -p.
struct AntipodalLimit {
  Eigen::Vector3d direction;
  double weight_plus = 0;
  double weight_minus = 0;
  double max_deviation = 0;  // largest distance of a point from ±p
};

struct SphereFlowStep {
  int step;
  double moment_norm;
  std::vector<Eigen::Vector3d> points;
};

struct SphereFlowResult {
  SphereVerdict verdict = SphereVerdict::kDivergesToFixedPoint;
  SphereConfig final;
  double moment_norm = 0;
  double initial_moment_norm = 0;
  std::vector<SphereFlowStep> trajectory;
  AntipodalLimit limit;  // meaningful when not balanced
  int steps = 0;
  double max_displacement = 0;  // largest distance any point travelled
};

/// Backtracking descent of |μ|²: each point moves along -(μ - <μ,u>u) and is
/// projected back to the sphere. Verdict balanced when |μ| < 1e-8.
SphereFlowResult sphere_flow(const SphereConfig& c, double step, int max_steps);

struct MatrixFlowStep {
  int step;
  double commutator_norm;  // ||[A, A*]||_F
  double frobenius_norm;
};

enum class MatrixVerdict { kNormal, kNotNormal };
std::string to_string(MatrixVerdict v);

struct MatrixFlowResult {
  MatrixVerdict verdict = MatrixVerdict::kNotNormal;
  Eigen::MatrixXcd limit;
  double commutator_norm = 0;
  std::vector<MatrixFlowStep> trajectory;
  /// Largest distance between matched eigenvalues of the input and the limit.
  double eigenvalue_drift = 0;
  int steps = 0;
};

/// Gradient flow of ||[A,A*]||² along the conjugation orbit:
/// A <- exp(-τC) A exp(τC) with C = [A,A*] Hermitian, Armijo backtracking and
/// step growth. Verdict normal when ||[A,A*]|| < 1e-8.
MatrixFlowResult matrix_flow(const Eigen::MatrixXcd& A, double step, int max_steps);

/// Sorted (by real, then imaginary part) eigenvalues.
std::vector<std::complex<double>> sorted_eigenvalues(const Eigen::MatrixXcd& A);

/// Diagonal one-parameter subgroup λ(t) = diag(t^{weights_i}) in a fixed basis.
struct OnePS {
  IntVector weights;
  std::string basis = "standard";

  void validate() const;
};

/// w(λ, v) = -min{weights_i : v_i != 0}. Throws on v = 0.
std::int64_t hm_weight(const OnePS& lambda, const std::vector<std::complex<double>>& v);

struct KempfNessSamples {
  std::vector<double> s;
  std::vector<double> F;  // log |exp(s ξ) v|
  int convexity_violations = 0;
  double slope_minus_infinity = 0;  // from the two lowest samples
  double slope_plus_infinity = 0;
  double argmin = 0;
};

/// Samples log|exp(sξ)v| on `count` evenly spaced s in [s_min, s_max].
KempfNessSamples kn_function(const std::vector<std::complex<double>>& v, const OnePS& xi, double s_min,
                             double s_max, int count);

}  // namespace toric
