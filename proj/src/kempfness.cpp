#include "toric/kempfness.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace toric {

double SphereConfig::total_weight() const {
  double s = 0;
  for (std::size_t i = 0; i < points.size(); ++i) s += weight(i);
  return s;
}

void SphereConfig::validate() const {
  if (points.empty()) throw std::invalid_argument("sphere configuration has no points");
  if (!multiplicity.empty() && multiplicity.size() != points.size())
    throw std::invalid_argument("one multiplicity per point is required");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (std::abs(points[i].norm() - 1.0) > 1e-12)
      throw std::invalid_argument("point " + std::to_string(i) + " is not on the unit sphere");
    if (!(weight(i) > 0)) throw std::invalid_argument("multiplicities must be positive");
  }
}

Eigen::Vector3d sphere_moment(const SphereConfig& c) {
  Eigen::Vector3d mu = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < c.points.size(); ++i) mu += c.weight(i) * c.points[i];
  return mu;
}

std::string to_string(SphereVerdict v) {
  return v == SphereVerdict::kBalanced ? "balanced" : "diverges-to-fixed-point";
}

std::string to_string(MatrixVerdict v) { return v == MatrixVerdict::kNormal ? "normal" : "not-normal"; }

SphereFlowResult sphere_flow(const SphereConfig& c, double step, int max_steps) {
  c.validate();
  if (!(step > 0)) throw std::invalid_argument("sphere_flow: step must be positive");
  SphereFlowResult r;
  SphereConfig cur = c;
  Eigen::Vector3d mu = sphere_moment(cur);
  double E = mu.squaredNorm();
  r.initial_moment_norm = std::sqrt(E);
  r.trajectory.push_back({0, std::sqrt(E), cur.points});
  double tau = step;
  const std::size_t n = cur.points.size();
  std::vector<Eigen::Vector3d> v(n), trial(n);

  for (int k = 1; k <= max_steps; ++k) {
    if (std::sqrt(E) < 1e-12) break;
    double G = 0;
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = -(mu - mu.dot(cur.points[i]) * cur.points[i]);
      G += cur.weight(i) * v[i].squaredNorm();
    }
    if (std::sqrt(G) < 1e-11) break;  // stationary
    bool accepted = false;
    double E_new = E;
    while (tau > 1e-16) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = (cur.points[i] + tau * v[i]).normalized();
      Eigen::Vector3d mu_new = Eigen::Vector3d::Zero();
      for (std::size_t i = 0; i < n; ++i) mu_new += cur.weight(i) * trial[i];
      E_new = mu_new.squaredNorm();
      // dE/dτ = -2 G at τ = 0
      if (E_new <= E - 2e-4 * tau * G) {
        accepted = true;
        mu = mu_new;
        break;
      }
      tau *= 0.5;
    }
    if (!accepted) break;
    cur.points = trial;
    E = E_new;
    r.steps = k;
    r.trajectory.push_back({k, std::sqrt(E), cur.points});
    tau = std::min(2.0 * tau, step);
  }

  r.final = cur;
  r.moment_norm = std::sqrt(E);
  r.verdict = r.moment_norm < 1e-8 ? SphereVerdict::kBalanced : SphereVerdict::kDivergesToFixedPoint;
  for (std::size_t i = 0; i < n; ++i)
    r.max_displacement = std::max(r.max_displacement, (cur.points[i] - c.points[i]).norm());
  if (r.moment_norm > 0) {
    Eigen::Vector3d p = mu.normalized();
    r.limit.direction = p;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& u = cur.points[i];
      if (u.dot(p) >= 0) {
        r.limit.weight_plus += cur.weight(i);
        r.limit.max_deviation = std::max(r.limit.max_deviation, (u - p).norm());
      } else {
        r.limit.weight_minus += cur.weight(i);
        r.limit.max_deviation = std::max(r.limit.max_deviation, (u + p).norm());
      }
    }
  }
  return r;
}

std::vector<std::complex<double>> sorted_eigenvalues(const Eigen::MatrixXcd& A) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(A, false);
  std::vector<std::complex<double>> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(ev.begin(), ev.end(), [](const auto& a, const auto& b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return ev;
}

namespace {

Eigen::MatrixXcd commutator(const Eigen::MatrixXcd& X, const Eigen::MatrixXcd& Y) { return X * Y - Y * X; }

double eigenvalue_distance(std::vector<std::complex<double>> a, std::vector<std::complex<double>> b) {
  // Greedy nearest matching; adequate for the small matrices handled here.
  double worst = 0;
  for (const auto& x : a) {
    auto it = std::min_element(b.begin(), b.end(),
                               [&](const auto& p, const auto& q) { return std::abs(p - x) < std::abs(q - x); });
    worst = std::max(worst, std::abs(*it - x));
    b.erase(it);
  }
  return worst;
}

}  // namespace

MatrixFlowResult matrix_flow(const Eigen::MatrixXcd& A0, double step, int max_steps) {
  if (A0.rows() != A0.cols() || A0.rows() == 0) throw std::invalid_argument("matrix_flow needs a square matrix");
  if (!A0.allFinite()) throw std::invalid_argument("matrix_flow: non-finite entries");
  if (!(step > 0)) throw std::invalid_argument("matrix_flow: step must be positive");
  MatrixFlowResult r;
  Eigen::MatrixXcd A = A0;
  Eigen::MatrixXcd C = commutator(A, A.adjoint());
  double f = C.squaredNorm();
  r.trajectory.push_back({0, std::sqrt(f), A.norm()});
  double tau = step;

  for (int k = 1; k <= max_steps; ++k) {
    if (std::sqrt(f) < 1e-14) break;
    // d/dτ ||C||² = -4 ||[C, A]||² along A -> exp(-τC) A exp(τC)
    const double rate = 4.0 * commutator(C, A).squaredNorm();
    if (rate == 0) break;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(C);
    const Eigen::MatrixXcd& V = es.eigenvectors();
    const Eigen::VectorXd& d = es.eigenvalues();
    bool accepted = false;
    Eigen::MatrixXcd A_new, C_new;
    double f_new = f;
    while (tau > 1e-300) {
      Eigen::VectorXcd down = (-tau * d).array().exp().cast<std::complex<double>>();
      Eigen::VectorXcd up = (tau * d).array().exp().cast<std::complex<double>>();
      A_new = V * down.asDiagonal() * V.adjoint() * A * V * up.asDiagonal() * V.adjoint();
      C_new = commutator(A_new, A_new.adjoint());
      f_new = C_new.squaredNorm();
      if (A_new.allFinite() && f_new <= f - 1e-4 * tau * rate) {
        accepted = true;
        break;
      }
      tau *= 0.5;
    }
    if (!accepted) break;
    A = A_new;
    C = C_new;
    f = f_new;
    r.steps = k;
    r.trajectory.push_back({k, std::sqrt(f), A.norm()});
    tau *= 2.0;
  }

  r.limit = A;
  r.commutator_norm = std::sqrt(f);
  r.verdict = r.commutator_norm < 1e-8 ? MatrixVerdict::kNormal : MatrixVerdict::kNotNormal;
  r.eigenvalue_drift = eigenvalue_distance(sorted_eigenvalues(A0), sorted_eigenvalues(A));
  return r;
}

void OnePS::validate() const {
  if (weights.empty() || std::all_of(weights.begin(), weights.end(), [](std::int64_t w) { return w == 0; }))
    throw std::invalid_argument("one-parameter subgroup must have a nonzero weight");
}

std::int64_t hm_weight(const OnePS& lambda, const std::vector<std::complex<double>>& v) {
  lambda.validate();
  if (v.size() != lambda.weights.size()) throw std::invalid_argument("hm_weight: dimension mismatch");
  bool any = false;
  std::int64_t order = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == std::complex<double>(0, 0)) continue;
    order = any ? std::min(order, lambda.weights[i]) : lambda.weights[i];
    any = true;
  }
  if (!any) throw std::invalid_argument("hm_weight: v must be nonzero");
  return -order;
}

KempfNessSamples kn_function(const std::vector<std::complex<double>>& v, const OnePS& xi, double s_min,
                             double s_max, int count) {
  xi.validate();
  if (v.size() != xi.weights.size()) throw std::invalid_argument("kn_function: dimension mismatch");
  if (count < 3 || !(s_max > s_min)) throw std::invalid_argument("kn_function: need count >= 3 and s_min < s_max");
  std::vector<std::pair<double, double>> terms;  // (2 ξ_i, log |v_i|²)
  for (std::size_t i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > 0) terms.emplace_back(2.0 * static_cast<double>(xi.weights[i]), 2.0 * std::log(std::abs(v[i])));
  if (terms.empty()) throw std::invalid_argument("kn_function: v must be nonzero");

  KempfNessSamples out;
  for (int k = 0; k < count; ++k) {
    const double s = s_min + (s_max - s_min) * k / (count - 1);
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& [a, b] : terms) top = std::max(top, a * s + b);
    double acc = 0;
    for (const auto& [a, b] : terms) acc += std::exp(a * s + b - top);
    out.s.push_back(s);
    out.F.push_back(0.5 * (top + std::log(acc)));
  }
  for (int k = 1; k + 1 < count; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    const double second = out.F[uk - 1] - 2.0 * out.F[uk] + out.F[uk + 1];
    if (second < -1e-12 * (1.0 + std::abs(out.F[uk]))) ++out.convexity_violations;
  }
  const std::size_t n = out.s.size();
  out.slope_minus_infinity = (out.F[1] - out.F[0]) / (out.s[1] - out.s[0]);
  out.slope_plus_infinity = (out.F[n - 1] - out.F[n - 2]) / (out.s[n - 1] - out.s[n - 2]);
  out.argmin = out.s[static_cast<std::size_t>(std::min_element(out.F.begin(), out.F.end()) - out.F.begin())];
  return out;
}

}  // namespace toric
