#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "toric/solver.hpp"

#include <cmath>

using namespace toric;

namespace {

Polytope segment(Rational lo, Rational hi) { return Polytope::from_vertices(1, {{lo}, {hi}}); }
Polytope rectangle(Rational a, Rational b) { return Polytope::from_vertices(2, {{0, 0}, {a, 0}, {0, b}, {a, b}}); }

double cosine_bump(const Eigen::VectorXd& x) {
  double v = 0.05;
  for (Eigen::Index i = 0; i < x.size(); ++i) v *= std::cos(2 * M_PI * x(i));
  return v;
}

// F may rise by rounding when the affine gauge is removed.
void check_monotone(const std::vector<IterationRecord>& history) {
  for (std::size_t i = 1; i < history.size(); ++i)
    CHECK(history[i].F <= history[i - 1].F + 1e-13 * (1 + std::abs(history[i - 1].F)));
}

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

}  // namespace

TEST_CASE("segment solve recovers the reference potential") {
  auto I = segment(0, 1);
  SolveOptions o;
  o.initial = cosine_bump;
  auto rep = solve(I, BoundaryMeasure::uniform(I), MeshParams{129}, o);
  REQUIRE(rep.termination == Termination::kConverged);
  CHECK(rep.residual < 1e-5);
  CHECK(rep.iterations < 50);
  check_monotone(rep.history);
  const auto& g = *rep.grid;
  for (std::size_t k = 1; k + 1 < g.size(); ++k) {
    const double x = g.point(k)(0);
    CHECK(g.hessian(k)(0, 0) == doctest::Approx(1 / (x * (1 - x))).epsilon(1e-3));
  }
  CHECK(rep.history.back().F == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("square solve converges to constant curvature") {
  auto S = rectangle(1, 1);
  SolveOptions o;
  o.initial = cosine_bump;
  auto rep = solve(S, BoundaryMeasure::uniform(S), MeshParams{33}, o);
  REQUIRE(rep.termination == Termination::kConverged);
  check_monotone(rep.history);
  const auto& g = *rep.grid;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (g.layer(k) >= 2) CHECK(abreu_S(g, k).S == doctest::Approx(2.0).epsilon(1e-6));
  // u0 solves the discrete equation exactly, so phi is affine.
  auto rest = remove_affine_part(g, g.phi());
  for (double v : rest) CHECK(std::abs(v) < 1e-8);
}

TEST_CASE("weighted rectangle with balanced weights") {
  auto R = rectangle(2, 1);
  BoundaryMeasure w{{3, 1, 3, 1}};  // bottom, right, top, left
  SolveOptions o;
  o.initial = [](const Eigen::VectorXd& x) { return 0.1 * std::sin(M_PI * x(0) / 2) * x(1) * x(1); };
  auto rep = solve(R, w, MeshParams{33}, o);
  REQUIRE(rep.termination == Termination::kConverged);
  const auto& g = *rep.grid;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (g.layer(k) >= 2) CHECK(abreu_S(g, k).S == doctest::Approx(g.A() / 2).epsilon(1e-6));
}

TEST_CASE("nonzero Futaki vector is refused") {
  auto I = segment(0, 1);
  auto rep = solve(I, BoundaryMeasure{{1, 2}}, MeshParams{33});
  CHECK(rep.termination == Termination::kRefusedFutaki);
  CHECK(rep.futaki == Point{Rational(1, 2)});
  CHECK_FALSE(rep.grid);
  CHECK(to_string(rep.termination) == "refused-futaki");
}

TEST_CASE("energy ignores affine changes when the Futaki vector vanishes") {
  auto S = rectangle(1, 1);
  PotentialGrid g(S, BoundaryMeasure::uniform(S), MeshParams{17});
  g.sample(cosine_bump);
  const double F0 = mabuchi(g);
  g.sample([](const Eigen::VectorXd& x) { return cosine_bump(x) + 0.7 - 3 * x(0) + 2 * x(1); });
  CHECK(mabuchi(g) == doctest::Approx(F0).epsilon(1e-12));
}

TEST_CASE("energy leaves the convex cone") {
  auto I = segment(0, 1);
  PotentialGrid g(I, BoundaryMeasure::uniform(I), MeshParams{33});
  g.sample([](const Eigen::VectorXd& x) { return -10 * x(0) * x(0); });
  CHECK_THROWS_AS(mabuchi(g), ConvexityError);
}

TEST_CASE("ray slopes") {
  auto I = segment(0, 1);
  BoundaryMeasure w{{1, 2}};

  Quadratic lin = Quadratic::zero(1);
  lin.linear[0] = 1;
  auto a = ray_slope(I, w, lin, 1e3);
  CHECK(a.L == Rational(1, 2));
  CHECK(std::abs(a.slope - 0.5) < 1e-9 * 0.5);
  for (std::size_t j = 1; j < a.ladder.size(); ++j) {
    const double s = (a.ladder[j].F - a.ladder[j - 1].F) / (a.ladder[j].s - a.ladder[j - 1].s);
    CHECK(s == doctest::Approx(0.5).epsilon(1e-9));
  }

  auto zero = ray_slope(I, w, Quadratic::zero(1), 1e3);
  CHECK(zero.L == 0);
  CHECK(std::abs(zero.slope) < 1e-12);

  Quadratic sq = Quadratic::zero(1);
  sq.hessian[0][0] = 2;  // x^2
  auto b = ray_slope(I, w, sq, 1e3);
  CHECK(b.L == 1);
  CHECK(std::abs(b.slope - 1) < 0.05);
  // The logarithmic term fades as s grows.
  auto c = ray_slope(I, w, sq, 1e2);
  CHECK(std::abs(b.slope - 1) < std::abs(c.slope - 1));
}

TEST_CASE("integration by parts at convergence") {
  auto I = segment(0, 1);
  auto rs = solve(I, BoundaryMeasure::uniform(I), MeshParams{129});
  REQUIRE(rs.termination == Termination::kConverged);
  for (const auto& q : quadratic_basis(1)) {
    auto c = ibp_check(*rs.grid, q);
    CHECK(c.within(10));
  }

  auto R = rectangle(1, 1);
  SolveOptions o;
  o.initial = cosine_bump;
  auto rr = solve(R, BoundaryMeasure::uniform(R), MeshParams{33}, o);
  REQUIRE(rr.termination == Termination::kConverged);
  for (const auto& q : quadratic_basis(2)) {
    auto c = ibp_check(*rr.grid, q);
    CHECK(c.within(10));
  }
}

TEST_CASE("destabilized square ends with a divergence certificate") {
  auto S = rectangle(1, 1);
  BoundaryMeasure w{{1, 2, 1, 1}};
  SolveOptions o;
  o.require_zero_futaki = false;
  auto rep = solve(S, w, MeshParams{17}, o);
  REQUIRE(rep.termination == Termination::kDivergence);
  REQUIRE(rep.certificate);
  const auto& c = *rep.certificate;
  CHECK(c.phi_sup > c.ceiling);
  CHECK(c.observed_slope == doctest::Approx(c.predicted_slope).epsilon(1e-3));
  CHECK(c.predicted_slope < 0);
  REQUIRE(c.destabilizer_L);
  CHECK(*c.destabilizer_L < 0);
  REQUIRE(c.correlated_crease);
  CHECK(c.correlated_crease->L < 0);
  check_monotone(rep.history);
}

TEST_CASE("solver refuses shapes it cannot mesh") {
  auto T = Polytope::from_vertices(2, {{0, 0}, {1, 0}, {0, 1}});
  CHECK_THROWS_AS(solve(T, BoundaryMeasure::uniform(T), MeshParams{9}), GeometryError);
}

TEST_CASE("affine part removal") {
  auto S = rectangle(2, 1);
  PotentialGrid g(S, BoundaryMeasure::uniform(S), MeshParams{9});
  g.sample([](const Eigen::VectorXd& x) { return 1 + 2 * x(0) - x(1); });
  for (double v : remove_affine_part(g, g.phi())) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("observer sees every iteration") {
  auto I = segment(0, 1);
  int calls = 0;
  SolveOptions o;
  o.initial = cosine_bump;
  o.observer = [&](const IterationRecord&, const PotentialGrid&) { ++calls; };
  auto rep = solve(I, BoundaryMeasure::uniform(I), MeshParams{65}, o);
  CHECK(calls == static_cast<int>(rep.history.size()));
}
