// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include "support.hpp"
#include "toric/futaki.hpp"
#include "toric/kempfness.hpp"
#include "toric/solver.hpp"
#include "toric/stability.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace toric;
using namespace toric::testing;

namespace {

// Pinned tolerances.
constexpr double kC1Residual = 1e-5;
constexpr double kC1HessianRel = 1e-4;
constexpr double kC1Seconds = 10;
constexpr int kC1Nodes = 256;
constexpr double kC2RatioLo = 3.5, kC2RatioHi = 4.5;
constexpr double kC3LinearRel = 1e-9;
constexpr double kC3QuadraticRel = 0.05;
constexpr double kC3SMax = 1e3;
constexpr int kC4Trials = 100;
constexpr double kC5RatioSpread = 0.01;
constexpr double kC5FiltrationRel = 0.03;
constexpr int kC5KMin = 10, kC5KMax = 40, kC5FiltrationK = 256;
constexpr double kC5ZeroF1 = 1e-9;
constexpr double kC6Factor = 10;
constexpr int kC7Nodes = 17, kC7Resolution = 4;
constexpr double kC8Balanced = 1e-8, kC8Unstable = 1e-6, kC8Commutator = 1e-8, kC8Drift = 1e-6;
constexpr double kC8JordanNorm = 1e-6, kC8SlopeAbs = 1e-9, kC8Seconds = 60;
constexpr int kC8Trials = 100;
constexpr int kC9KMax = 40, kC9Polygons = 5;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("C%d %s %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

Polytope segment(Rational lo, Rational hi) { return Polytope::from_vertices(1, {{lo}, {hi}}); }
Polytope square() { return Polytope::from_vertices(2, {{0, 0}, {1, 0}, {0, 1}, {1, 1}}); }

double cosine_bump(const Eigen::VectorXd& x) {
  double v = 0.05;
  for (Eigen::Index i = 0; i < x.size(); ++i) v *= std::cos(2 * M_PI * x(i));
  return v;
}

// ---------------------------------------------------------------------------

void c1() {
  auto t0 = Clock::now();
  auto I = segment(0, 1);
  SolveOptions o;
  o.initial = cosine_bump;
  auto rep = solve(I, BoundaryMeasure::uniform(I), MeshParams{kC1Nodes}, o);
  const double elapsed = seconds_since(t0);
  if (rep.termination != Termination::kConverged) {
    report(1, false, "segment solve ended with " + to_string(rep.termination));
    return;
  }
  const auto& g = *rep.grid;
  std::size_t mid = 0;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (std::abs(g.point(k)(0) - 0.5) < std::abs(g.point(mid)(0) - 0.5)) mid = k;
  const double x = g.point(mid)(0);
  const double exact = 1 / (x * (1 - x));
  const double rel = std::abs(g.hessian(mid)(0, 0) - exact) / exact;
  const bool pass = rep.residual < kC1Residual && rel < kC1HessianRel && elapsed < kC1Seconds;
  report(1, pass,
         "segment, " + std::to_string(kC1Nodes) + " graded nodes: residual " + fmt(rep.residual) + " (< " +
             fmt(kC1Residual) + "), u'' rel. error at x=" + fmt(x) + " " + fmt(rel) + " (< " + fmt(kC1HessianRel) +
             "), " + fmt(elapsed) + " s (< " + fmt(kC1Seconds) + ")");
}

// ---------------------------------------------------------------------------

double reference_sum(const Eigen::VectorXd& x) {
  double s = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += x(i) * std::log(x(i)) + (1 - x(i)) * std::log(1 - x(i));
  return s;
}

// Largest |S - A/2| over nodes in [1/4, 3/4]^n for the reference potential
// sampled onto a uniform mesh and differentiated by finite differences only.
double sampled_S_error(const Polytope& P, int nodes) {
  PotentialGrid g(P, BoundaryMeasure::uniform(P), MeshParams::uniform(nodes), Reference::kNone);
  g.sample(reference_sum);
  double err = 0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    auto x = g.point(k);
    if (g.layer(k) < 2 || x.minCoeff() < 0.25 - 1e-12 || x.maxCoeff() > 0.75 + 1e-12) continue;
    err = std::max(err, std::abs(abreu_S(g, k).S - g.A() / 2));
  }
  return err;
}

void c2() {
  bool pass = true;
  std::string detail;
  for (const auto& [name, P] : {std::pair{std::string("segment"), segment(0, 1)}, std::pair{std::string("square"), square()}}) {
    const double e17 = sampled_S_error(P, 17), e33 = sampled_S_error(P, 33), e65 = sampled_S_error(P, 65);
    const double r1 = e17 / e33, r2 = e33 / e65;
    pass = pass && r1 >= kC2RatioLo && r1 <= kC2RatioHi && r2 >= kC2RatioLo && r2 <= kC2RatioHi;
    detail += name + " error ratios " + fmt(r1) + ", " + fmt(r2) + "; ";
  }
  report(2, pass, detail + "required in [" + fmt(kC2RatioLo) + ", " + fmt(kC2RatioHi) + "]");
}

// ---------------------------------------------------------------------------

void c3() {
  auto I = segment(0, 1);
  BoundaryMeasure w{{1, 2}};
  const Point F = futaki_linear(I, w);
  const bool exact = F == Point{Rational(1, 2)};
  const bool refused = solve(I, w, MeshParams{65}).termination == Termination::kRefusedFutaki;

  Quadratic lin = Quadratic::zero(1);
  lin.linear[0] = 1;
  auto a = ray_slope(I, w, lin, kC3SMax);
  const double lin_rel = std::abs(a.slope - to_double(a.L)) / std::abs(to_double(a.L));

  Quadratic sq = Quadratic::zero(1);
  sq.hessian[0][0] = 2;
  auto b = ray_slope(I, w, sq, kC3SMax);
  const double sq_rel = std::abs(b.slope - to_double(b.L)) / std::abs(to_double(b.L));

  const bool pass = exact && refused && lin_rel < kC3LinearRel && sq_rel < kC3QuadraticRel;
  report(3, pass,
         "Futaki " + to_string(F) + (exact ? " (exact)" : " (expected 1/2)") + ", solve " +
             (refused ? "refused" : "did not refuse") + ", linear slope rel. error " + fmt(lin_rel) + " (< " +
             fmt(kC3LinearRel) + "), x^2 slope " + fmt(b.slope) + " vs L = " + to_string(b.L) + " rel. " +
             fmt(sq_rel) + " (< " + fmt(kC3QuadraticRel) + ")");
}

// ---------------------------------------------------------------------------

void c4() {
  auto I = segment(-1, 1);
  PLConvexFunction abs({AffineFunction{{1}, 0}, AffineFunction{{-1}, 0}});
  const Rational L_abs = functional_L(I, BoundaryMeasure::uniform(I), abs);

  Rng rng(1001);
  int constants_ok = 0;
  for (int t = 0; t < kC4Trials; ++t) {
    auto P = random_polygon(rng);
    auto sigma = random_weights(rng, P);
    if (functional_L(P, sigma, AffineFunction{{0, 0}, random_rational(rng, 5, 7)}) == 0) ++constants_ok;
  }
  int invariant_ok = 0;
  for (int t = 0; t < kC4Trials; ++t) {
    auto P = random_polygon(rng, 6);
    auto sigma = random_weights(rng, P);
    auto T = random_unimodular(rng);
    Point s = random_point(rng, 2, 2, 2);
    auto f = random_pl(rng, 2, 3);
    if (functional_L(P, sigma, f) == functional_L(P.transformed(T, s), sigma, push_forward(f, T, s))) ++invariant_ok;
  }
  const bool pass = L_abs == 1 && constants_ok == kC4Trials && invariant_ok == kC4Trials;
  report(4, pass,
         "L(|x|) = " + to_string(L_abs) + ", L(const) = 0 in " + std::to_string(constants_ok) + "/" +
             std::to_string(kC4Trials) + ", unimodular invariance in " + std::to_string(invariant_ok) + "/" +
             std::to_string(kC4Trials) + " (exact)");
}

// ---------------------------------------------------------------------------

void c5() {
  std::vector<std::pair<std::string, Polytope>> shapes{
      {"square", square()},
      {"trapezoid", Polytope::from_vertices(2, {{0, 0}, {2, 0}, {1, 1}, {0, 1}})},
      {"pentagon", Polytope::from_vertices(2, {{0, 0}, {3, 0}, {3, 1}, {1, 2}, {0, 2}})}};
  bool signs = true;
  std::vector<double> ratios;
  std::string detail;
  for (const auto& [name, P] : shapes) {
    auto sigma = BoundaryMeasure::uniform(P);
    for (IntVector xi : {IntVector{1, 0}, IntVector{0, 1}}) {
      const Rational L = functional_L(P, sigma, AffineFunction{to_point(xi), 0});
      auto fit = expansion(P, xi, kC5KMin, kC5KMax);
      const int fit_sign = std::abs(fit.F1) < kC5ZeroF1 ? 0 : (fit.F1 > 0 ? 1 : -1);
      signs = signs && fit_sign == sign(L);
      if (L == 0) continue;
      ratios.push_back(fit.F1 * to_double(volume(P)) / to_double(L));
    }
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  const double spread = *hi / *lo - 1;
  double mean = 0;
  for (double r : ratios) mean += r;
  mean /= static_cast<double>(ratios.size());

  auto I = segment(-1, 1);
  PLConvexFunction abs({AffineFunction{{1}, 0}, AffineFunction{{-1}, 0}});
  const double L_abs = to_double(functional_L(I, BoundaryMeasure::uniform(I), abs));
  const double s_half = to_double(filtration_futaki(I, abs, kC5FiltrationK / 2).value);
  const double s_full = to_double(filtration_futaki(I, abs, kC5FiltrationK).value);
  const double filtration_ratio = richardson(s_half, s_full) * to_double(volume(I)) / L_abs;
  const double filtration_rel = std::abs(filtration_ratio - mean) / mean;

  const bool pass = signs && ratios.size() >= 3 && spread < kC5RatioSpread && filtration_rel < kC5FiltrationRel;
  detail = std::string("signs ") + (signs ? "agree" : "disagree") + " on 6 (polygon, xi) pairs; F1 Vol/L over " +
           std::to_string(ratios.size()) + " nonzero cases in [" + fmt(*lo) + ", " + fmt(*hi) + "], spread " +
           fmt(spread) + " (< " + fmt(kC5RatioSpread) + "); filtration |x| k=" + std::to_string(kC5FiltrationK) +
           " extrapolated ratio " + fmt(filtration_ratio) + ", rel. " + fmt(filtration_rel) + " (< " +
           fmt(kC5FiltrationRel) + ")";
  report(5, pass, detail);
}

// ---------------------------------------------------------------------------

std::vector<Quadratic> quadratic_basis(int n) {
  std::vector<Quadratic> out;
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      Quadratic q = Quadratic::zero(n);
      q.hessian[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] += 1;
      q.hessian[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] += 1;
      out.push_back(q);
    }
  for (int a = 0; a < n; ++a) {
    Quadratic q = Quadratic::zero(n);
    q.linear[static_cast<std::size_t>(a)] = 1;
    out.push_back(q);
  }
  Quadratic c = Quadratic::zero(n);
  c.constant = 1;
  out.push_back(c);
  return out;
}

void c6() {
  bool pass = true;
  int checked = 0;
  double worst = 0;
  for (const auto& [P, nodes] : {std::pair{segment(0, 1), 129}, std::pair{square(), 33}}) {
    SolveOptions o;
    o.initial = cosine_bump;
    auto rep = solve(P, BoundaryMeasure::uniform(P), MeshParams{nodes}, o);
    if (rep.termination != Termination::kConverged) {
      pass = false;
      continue;
    }
    for (const auto& q : quadratic_basis(P.dim())) {
      auto c = ibp_check(*rep.grid, q);
      ++checked;
      pass = pass && c.within(kC6Factor);
      const double floor = 1e-10 * (1 + std::abs(c.lhs));
      worst = std::max(worst, std::abs(c.lhs - to_double(c.L_exact)) / std::max(c.quadrature_error, floor));
    }
  }
  report(6, pass && checked == 9,
         std::to_string(checked) + " quadratics on converged segment and square solves; worst |lhs - L| / "
         "quadrature error " + fmt(worst) + " (<= " + fmt(kC6Factor) + ")");
}

// ---------------------------------------------------------------------------

void c7() {
  auto S = square();
  int destabilized = 0, certified = 0, converged_unstable = 0, stable = 0, stable_converged = 0;
  CreaseSearchOptions scan;
  scan.scan_when_futaki_nonzero = true;
  for (int code = 0; code < 81; ++code) {
    BoundaryMeasure w;
    for (int i = 0, c = code; i < 4; ++i, c /= 3) w.weights.emplace_back(1 + c % 3);
    auto v = crease_search(S, w, kC7Resolution, scan);
    const bool negative = (v.witness_L && *v.witness_L < 0) || (!v.best.empty() && v.best.front().L < 0);
    SolveOptions o;
    o.require_zero_futaki = false;
    auto rep = solve(S, w, MeshParams{kC7Nodes}, o);
    if (negative) {
      ++destabilized;
      if (rep.termination == Termination::kDivergence) ++certified;
      if (rep.termination == Termination::kConverged) ++converged_unstable;
    } else {
      ++stable;
      if (rep.termination == Termination::kConverged) ++stable_converged;
    }
  }
  report(7, destabilized > 0 && certified == destabilized && converged_unstable == 0,
         "square weightings {1,2,3}^4: " + std::to_string(destabilized) + " with L < 0, " + std::to_string(certified) +
             " ended in a divergence certificate, " + std::to_string(converged_unstable) +
             " converged; the remaining " + std::to_string(stable) + " converged in " +
             std::to_string(stable_converged) + " cases");
}

// ---------------------------------------------------------------------------

void c8() {
  auto t0 = Clock::now();
  const Eigen::Vector3d north(0, 0, 1), east(1, 0, 0);
  auto a = sphere_flow(SphereConfig{{north, east}, {2, 2}}, 0.1, 10000);
  auto b = sphere_flow(SphereConfig{{north, east}, {3, 1}}, 0.1, 10000);
  const bool sphere = a.moment_norm < kC8Balanced && std::abs(b.moment_norm - 2) < kC8Unstable;

  Eigen::MatrixXcd A(2, 2), J(2, 2);
  A << 1, 1, 0, 2;
  J << 0, 1, 0, 0;
  auto m = matrix_flow(A, 0.1, 10000);
  auto j = matrix_flow(J, 0.1, 10000);
  const bool matrix = m.commutator_norm < kC8Commutator && m.eigenvalue_drift < kC8Drift &&
                      j.limit.norm() < kC8JordanNorm;

  Rng rng(1009);
  std::uniform_int_distribution<int> weight(-3, 3), dim(2, 5), coin(0, 2);
  std::normal_distribution<double> gauss;
  int kn_ok = 0, violations = 0;
  for (int t = 0; t < kC8Trials; ++t) {
    const int n = dim(rng);
    OnePS lambda;
    while (std::all_of(lambda.weights.begin(), lambda.weights.end(), [](auto w) { return w == 0; })) {
      lambda.weights.clear();
      for (int i = 0; i < n; ++i) lambda.weights.push_back(weight(rng));
    }
    std::vector<std::complex<double>> v(static_cast<std::size_t>(n));
    while (std::all_of(v.begin(), v.end(), [](auto z) { return z == 0.0; }))
      for (auto& z : v) z = coin(rng) ? std::complex<double>(gauss(rng), gauss(rng)) : 0.0;
    auto kn = kn_function(v, lambda, -40, 40, 161);
    violations += kn.convexity_violations;
    if (kn.convexity_violations == 0 &&
        std::abs(kn.slope_minus_infinity + static_cast<double>(hm_weight(lambda, v))) < kC8SlopeAbs)
      ++kn_ok;
  }
  const double elapsed = seconds_since(t0);
  report(8, sphere && matrix && kn_ok == kC8Trials && elapsed < kC8Seconds,
         "(2,2) |mu| " + fmt(a.moment_norm) + " (< " + fmt(kC8Balanced) + "), (3,1) |mu| - 2 = " +
             fmt(b.moment_norm - 2) + " (|.| < " + fmt(kC8Unstable) + "); [[1,1],[0,2]] ||[A,A*]|| " +
             fmt(m.commutator_norm) + ", drift " + fmt(m.eigenvalue_drift) + "; Jordan ||A|| " + fmt(j.limit.norm()) +
             " (< " + fmt(kC8JordanNorm) + "); KN slopes match HM weights in " + std::to_string(kn_ok) + "/" +
             std::to_string(kC8Trials) + " (" + std::to_string(violations) + " convexity violations); " +
             fmt(elapsed) + " s (< " + fmt(kC8Seconds) + ")");
}

// ---------------------------------------------------------------------------

void c9() {
  auto S = square();
  bool square_ok = true;
  for (int k = 1; k <= kC9KMax; ++k) square_ok = square_ok && lattice_point_count(S, k) == Integer((k + 1) * (k + 1));

  Rng rng(1013);
  int reproduced = 0;
  for (int t = 0; t < kC9Polygons; ++t) {
    auto P = random_lattice_polygon(rng);
    auto e = exact_expansion(P, {1, 0});
    bool ok = e.d_poly.size() == 3;
    for (int k = 1; k <= kC9KMax && ok; ++k)
      ok = evaluate_polynomial(e.d_poly, k) == Rational(lattice_point_count(P, k));
    if (ok) ++reproduced;
  }
  report(9, square_ok && reproduced == kC9Polygons,
         std::string("square d_k = (k+1)^2 for k <= ") + std::to_string(kC9KMax) + (square_ok ? "" : " FAILED") +
             "; degree-2 interpolation reproduces all counts for " + std::to_string(reproduced) + "/" +
             std::to_string(kC9Polygons) + " random lattice polygons (exact)");
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> criteria{c1, c2, c3, c4, c5, c6, c7, c8, c9};
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), false, std::string("threw: ") + e.what());
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
