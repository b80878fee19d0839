#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "toric/kempfness.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace toric;
using Eigen::Vector3d;

namespace {

const Vector3d kNorth(0, 0, 1), kSouth(0, 0, -1);

Eigen::MatrixXcd matrix2(std::complex<double> a, std::complex<double> b, std::complex<double> c,
                         std::complex<double> d) {
  Eigen::MatrixXcd A(2, 2);
  A << a, b, c, d;
  return A;
}

}  // namespace

TEST_CASE("moment map examples") {
  CHECK(sphere_moment(SphereConfig{{kNorth, kSouth}, {}}).norm() == 0);
  CHECK((sphere_moment(SphereConfig{{kNorth, kSouth}, {3, 1}}) - Vector3d(0, 0, 2)).norm() == 0);
  const double s = 1 / std::sqrt(3.0);
  SphereConfig tetra{{Vector3d(s, s, s), Vector3d(s, -s, -s), Vector3d(-s, s, -s), Vector3d(-s, -s, s)}, {}};
  CHECK(sphere_moment(tetra).norm() < 1e-12);
  CHECK(tetra.total_weight() == 4);
}

TEST_CASE("sphere configurations are validated") {
  const SphereConfig bad{{Vector3d(1, 1, 0)}, {}}, good{{kNorth}, {2}};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_NOTHROW(good.validate());
}

TEST_CASE("two double points flow to an antipodal pair") {
  SphereConfig c{{kNorth, Vector3d(1, 0, 0)}, {2, 2}};
  auto r = sphere_flow(c, 0.1, 10000);
  CHECK(r.verdict == SphereVerdict::kBalanced);
  CHECK(r.moment_norm < 1e-8);
  CHECK((r.final.points[0] + r.final.points[1]).norm() < 1e-6);
  for (std::size_t i = 1; i < r.trajectory.size(); ++i)
    CHECK(r.trajectory[i].moment_norm < r.trajectory[i - 1].moment_norm);
}

TEST_CASE("a triple point cannot be balanced") {
  SphereConfig c{{kNorth, Vector3d(1, 0, 0)}, {3, 1}};
  auto r = sphere_flow(c, 0.1, 10000);
  CHECK(r.verdict == SphereVerdict::kDivergesToFixedPoint);
  CHECK(std::abs(r.moment_norm - 2) < 1e-6);
  CHECK(r.limit.weight_plus == 3);
  CHECK(r.limit.weight_minus == 1);
  CHECK(r.limit.max_deviation < 1e-6);
  CHECK(std::abs(r.limit.direction.dot(r.final.points[0])) == doctest::Approx(1.0).epsilon(1e-9));

  auto fixed = sphere_flow(SphereConfig{{kNorth, kSouth}, {3, 1}}, 0.1, 1000);
  CHECK(fixed.verdict == SphereVerdict::kDivergesToFixedPoint);
  CHECK(std::abs(fixed.moment_norm - 2) < 1e-12);
}

TEST_CASE("balanced configurations do not move") {
  SphereConfig c{{kNorth, kSouth}, {2, 2}};
  auto r = sphere_flow(c, 0.1, 100);
  CHECK(r.verdict == SphereVerdict::kBalanced);
  CHECK(r.steps == 0);
  CHECK(r.max_displacement == 0);
}

TEST_CASE("property: the sphere flow decreases |mu| on random configurations") {
  std::mt19937_64 rng(71);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 20; ++trial) {
    SphereConfig c;
    const int n = 3 + trial % 4;
    for (int i = 0; i < n; ++i) c.points.push_back(Vector3d(gauss(rng), gauss(rng), gauss(rng)).normalized());
    auto r = sphere_flow(c, 0.1, 5000);
    for (std::size_t i = 1; i < r.trajectory.size(); ++i)
      CHECK(r.trajectory[i].moment_norm <= r.trajectory[i - 1].moment_norm);
    // Distinct points with no majority: stable.
    CHECK(r.verdict == SphereVerdict::kBalanced);
    for (const auto& p : r.final.points) CHECK(std::abs(p.norm() - 1) < 1e-12);
  }
}

TEST_CASE("diagonalizable matrix flows to a normal one") {
  auto r = matrix_flow(matrix2(1, 1, 0, 2), 0.1, 10000);
  CHECK(r.verdict == MatrixVerdict::kNormal);
  CHECK(r.commutator_norm < 1e-8);
  CHECK(r.eigenvalue_drift < 1e-6);
  auto ev = sorted_eigenvalues(r.limit);
  CHECK(std::abs(ev[0] - 1.0) < 1e-6);
  CHECK(std::abs(ev[1] - 2.0) < 1e-6);
  for (std::size_t i = 1; i < r.trajectory.size(); ++i)
    CHECK(r.trajectory[i].commutator_norm <= r.trajectory[i - 1].commutator_norm);
}

TEST_CASE("nilpotent Jordan block collapses") {
  auto r = matrix_flow(matrix2(0, 1, 0, 0), 0.1, 10000);
  CHECK(r.limit.norm() < 1e-6);
  CHECK(r.eigenvalue_drift < 1e-6);
  for (std::size_t i = 1; i < r.trajectory.size(); ++i)
    CHECK(r.trajectory[i].frobenius_norm <= r.trajectory[i - 1].frobenius_norm + 1e-15);
}

TEST_CASE("normal matrices are fixed") {
  auto A = matrix2(1, std::complex<double>(0, 2), std::complex<double>(0, 2), 1);
  auto r = matrix_flow(A, 0.1, 100);
  CHECK(r.verdict == MatrixVerdict::kNormal);
  CHECK(r.steps == 0);
  CHECK((r.limit - A).norm() == 0);
}

TEST_CASE("property: random 3x3 matrices keep their spectrum") {
  std::mt19937_64 rng(73);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXcd A(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) A(i, j) = {gauss(rng), gauss(rng)};
    auto r = matrix_flow(A, 0.1, 20000);
    CHECK(r.verdict == MatrixVerdict::kNormal);
    CHECK(r.eigenvalue_drift < 1e-6);
  }
}

TEST_CASE("Hilbert-Mumford weights") {
  OnePS lambda{{1, -1}};
  CHECK(hm_weight(lambda, {1.0, 0.0}) == -1);
  CHECK(hm_weight(lambda, {1.0, 1.0}) == 1);
  CHECK(hm_weight(lambda, {0.0, 1.0}) == 1);
  CHECK_THROWS_AS(hm_weight(lambda, {0.0, 0.0}), std::invalid_argument);
  const OnePS trivial{{0, 0}};
  CHECK_THROWS_AS(trivial.validate(), std::invalid_argument);
}

TEST_CASE("Kempf-Ness function examples") {
  OnePS lambda{{1, -1}};
  auto line = kn_function({1.0, 0.0}, lambda, -5, 5, 41);
  for (std::size_t i = 0; i < line.s.size(); ++i) CHECK(line.F[i] == doctest::Approx(line.s[i]).epsilon(1e-12));
  CHECK(line.slope_minus_infinity == doctest::Approx(1.0));
  CHECK(line.slope_plus_infinity == doctest::Approx(1.0));

  auto cosh = kn_function({1.0, 1.0}, lambda, -20, 20, 401);
  CHECK(cosh.convexity_violations == 0);
  CHECK(cosh.slope_minus_infinity == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(cosh.slope_plus_infinity == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(cosh.argmin) < 1e-12);
  for (std::size_t i = 0; i < cosh.s.size(); ++i) {
    const double s = cosh.s[i];
    CHECK(cosh.F[i] == doctest::Approx(0.5 * std::log(std::exp(2 * s) + std::exp(-2 * s))).epsilon(1e-12));
  }
}

TEST_CASE("property: Kempf-Ness slopes match Hilbert-Mumford weights") {
  std::mt19937_64 rng(79);
  std::uniform_int_distribution<int> weight(-3, 3), dim(2, 5), coin(0, 2);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 100; ++trial) {
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
    CHECK(kn.convexity_violations == 0);
    CHECK(kn.slope_minus_infinity == doctest::Approx(-static_cast<double>(hm_weight(lambda, v))).epsilon(1e-9));
  }
}
