// Algebro-geometric Futaki invariant of a toric polarisation by lattice-point
// counting. Sections of L^k correspond to the lattice points m of kP and the
// circle generated by xi acts on the section labelled m with weight <xi, m>.
#pragma once

#include "toric/polytope.hpp"
#include "toric/stability.hpp"

#include <functional>
#include <vector>

namespace toric {

struct WeightData {
  int k = 0;
  Integer d_k;   // #(kP ∩ Z^n)
  Integer w_k;   // Σ <xi, m>
  Rational F_k;  // w_k / (k d_k)
};

/// Requires integral vertices.
WeightData count_and_weigh(const Polytope& P, const IntVector& xi, int k);

/// Calls visit(m) for every lattice point of kP (bounding-box scan).
void for_each_lattice_point(const Polytope& P, int k, const std::function<void(const IntVector&)>& visit);
Integer lattice_point_count(const Polytope& P, int k);

struct ExpansionFit {
  double F0 = 0, F1 = 0, F2 = 0;
  double residual = 0;  // RMS of the least-squares fit
  int k_min = 0, k_max = 0;
};

/// Least-squares fit of F_k on (1, 1/k, 1/k^2) over k_min..k_max.
ExpansionFit expansion(const Polytope& P, const IntVector& xi, int k_min, int k_max);

/// Exact polynomial through (k, values[k - k_first]) for consecutive k,
/// coefficients in increasing degree.
std::vector<Rational> interpolate_polynomial(int k_first, const std::vector<Rational>& values);
Rational evaluate_polynomial(const std::vector<Rational>& coefficients, const Rational& k);

struct ExactExpansion {
  std::vector<Rational> d_poly;  // Ehrhart polynomial, degree n
  std::vector<Rational> w_poly;  // weight polynomial, degree n + 1
  Rational F0, F1;
};

/// F0 and F1 read off exactly from the interpolated Ehrhart and weight
/// polynomials (n + 2 counts suffice).
ExactExpansion exact_expansion(const Polytope& P, const IntVector& xi);

/// Filtration statistic at level k for the filtration by sublevel sets
/// P_{i,k} = {f <= i/k}. A lattice point m of kP enters at level
/// i(m) = ceil(k f(m/k)); with w = Σ i(m) the returned value is
///     k * ( w / (k d_k) - ∫_P f dμ / Vol(P) ),
/// the 1/k coefficient of the weight expansion at finite k. It tends to
/// L(f) / (2 Vol(P)) when f takes integer values on lattice points of kP.
/// f is shifted to be nonnegative first (L kills constants).
struct FiltrationValue {
  Rational value;
  Rational shift;  // constant added to f
  Integer d_k;
  Integer weight;
};
FiltrationValue filtration_futaki(const Polytope& P, const PLConvexFunction& f, int k);

/// Richardson extrapolation of s_k = s + c/k + O(1/k^2): 2 s_{2k} - s_k.
double richardson(double s_k, double s_2k);

}  // namespace toric
