#include "toric/solver.hpp"

#include "energy.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>

namespace toric {
namespace {

using detail::DiscreteEnergy;

std::vector<std::size_t> gauge_pins(const PotentialGrid& g) {
  const std::size_t nx = g.axis(0).size();
  if (g.dim() == 1) return {0, nx - 1};
  const std::size_t ny = g.axis(1).size();
  return {g.index({0, 0}), g.index({nx - 1, 0}), g.index({0, ny - 1})};
}

// K restricted to the unpinned nodes, with identity rows on the pins.
Eigen::SparseMatrix<double> pin(const Eigen::SparseMatrix<double>& K, const std::vector<char>& pinned) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(K.nonZeros()));
  for (int c = 0; c < K.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(K, c); it; ++it)
      if (!pinned[static_cast<std::size_t>(it.row())] && !pinned[static_cast<std::size_t>(it.col())])
        t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (std::size_t k = 0; k < pinned.size(); ++k)
    if (pinned[k]) t.emplace_back(static_cast<int>(k), static_cast<int>(k), 1.0);
  Eigen::SparseMatrix<double> out(K.rows(), K.cols());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

struct Residuals {
  double interior = 0, boundary = 0;
};

Residuals residuals(const PotentialGrid& g, const Eigen::VectorXd& grad) {
  Residuals r;
  const auto ell = detail::boundary_minus_interior_weights(g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double gk = grad(static_cast<Eigen::Index>(k));
    if (g.is_interior(k)) {
      r.interior = std::max(r.interior, std::abs(gk) / g.mass(k));
    } else {
      // ell = (boundary weight) - A mass; recover the boundary weight.
      const double b = ell(static_cast<Eigen::Index>(k)) + g.A() * g.mass(k);
      r.boundary = std::max(r.boundary, std::abs(gk) / b);
    }
  }
  return r;
}

double rounding(double F) { return 1e-13 * (1.0 + std::abs(F)); }

double sup_norm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

double diameter(const Polytope& P) {
  double d = 0;
  for (const auto& a : P.vertices())
    for (const auto& b : P.vertices()) {
      double s = 0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double t = to_double(a[i] - b[i]);
        s += t * t;
      }
      d = std::max(d, std::sqrt(s));
    }
  return d;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0 || sbb == 0) return 0;
  return sab / std::sqrt(saa * sbb);
}

void fill_min_det(const PotentialGrid& g, IterationRecord& rec) {
  rec.min_det = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g.is_interior(k)) continue;
    const double d = g.hessian(k).determinant();
    if (d < rec.min_det) {
      rec.min_det = d;
      Eigen::VectorXd x = g.point(k);
      rec.min_det_at.assign(x.data(), x.data() + x.size());
    }
  }
}

DivergenceCertificate explain_divergence(const Polytope& P, const BoundaryMeasure& sigma, const PotentialGrid& g,
                                         int resolution) {
  DivergenceCertificate c;
  CreaseSearchOptions opts;
  opts.scan_when_futaki_nonzero = true;
  auto verdict = crease_search(P, sigma, resolution, opts);
  if (verdict.witness && verdict.witness_L && *verdict.witness_L < 0) {
    c.destabilizer = verdict.witness;
    c.destabilizer_L = verdict.witness_L;
  }
  for (const auto& cv : verdict.best) {
    if (cv.L >= 0) continue;
    auto f = cv.function();
    std::vector<double> fv(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
      Eigen::VectorXd x = g.point(k);
      Point xr(x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i) xr[static_cast<std::size_t>(i)] = Rational(x(i));
      fv[k] = to_double(f(xr));
    }
    const double r = pearson(g.phi(), fv);
    if (!c.correlated_crease || r > c.correlation) {
      c.correlated_crease = cv;
      c.correlation = r;
    }
  }
  return c;
}

}  // namespace

std::string to_string(Termination t) {
  switch (t) {
    case Termination::kConverged: return "converged";
    case Termination::kMaxIterations: return "max-iterations";
    case Termination::kDivergence: return "divergence-certificate";
    case Termination::kRefusedFutaki: return "refused-futaki";
    case Termination::kStalled: return "stalled";
  }
  return "?";
}

double mabuchi(const PotentialGrid& g) {
  DiscreteEnergy E(g);
  const double v = E.value(g.phi());
  if (std::isinf(v)) {
    E.inverses(g.phi());  // throws with the offending node
  }
  return v;
}

std::vector<double> remove_affine_part(const PotentialGrid& g, const std::vector<double>& phi) {
  const int m = g.dim() + 1;
  Eigen::MatrixXd N = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd basis(m);
  for (std::size_t k = 0; k < g.size(); ++k) {
    basis(0) = 1.0;
    basis.tail(g.dim()) = g.point(k);
    N += basis * basis.transpose();
    b += basis * phi[k];
  }
  Eigen::VectorXd c = N.ldlt().solve(b);
  std::vector<double> out(phi);
  for (std::size_t k = 0; k < g.size(); ++k) {
    basis(0) = 1.0;
    basis.tail(g.dim()) = g.point(k);
    out[k] -= basis.dot(c);
  }
  return out;
}

SolveReport solve(const Polytope& P, const BoundaryMeasure& sigma, const MeshParams& mesh,
                  const SolveOptions& options) {
  SolveReport report;
  report.futaki = futaki_linear(P, sigma);
  const bool futaki_zero = futaki_vanishes(report.futaki);
  if (!futaki_zero && options.require_zero_futaki) {
    report.termination = Termination::kRefusedFutaki;
    report.message = "Futaki vector " + to_string(report.futaki) +
                     " is nonzero: no constant scalar curvature potential exists for these weights";
    return report;
  }

  report.grid.emplace(guillemin(P, sigma, mesh));
  PotentialGrid& g = *report.grid;
  DiscreteEnergy E(g);
  const std::size_t N = g.size();
  const double ceiling = options.ceiling.value_or(1e3 * diameter(P) * g.A());

  // phi = psi + t <d, x>; t only moves when the Futaki vector is nonzero.
  std::vector<double> psi(N, 0.0), lin(N, 0.0);
  if (options.initial)
    for (std::size_t k = 0; k < N; ++k) psi[k] = options.initial(g.point(k));
  Eigen::VectorXd d = Eigen::VectorXd::Zero(g.dim());
  double t = 0, lin_slope = 0;
  if (!futaki_zero) {
    for (int a = 0; a < g.dim(); ++a) d(a) = -to_double(report.futaki[static_cast<std::size_t>(a)]);
    d.normalize();
    for (std::size_t k = 0; k < N; ++k) lin[k] = d.dot(g.point(k));
    lin_slope = E.linear_part(lin);
  }
  auto compose = [&](const std::vector<double>& p, double tt) {
    std::vector<double> phi(p);
    if (tt != 0)
      for (std::size_t k = 0; k < N; ++k) phi[k] += tt * lin[k];
    return phi;
  };

  std::vector<char> pinned(N, 0);
  for (auto k : gauge_pins(g)) pinned[k] = 1;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> precond;
  {
    std::vector<double> zero(N, 0.0);
    precond.compute(pin(E.hessian(zero), pinned));
    if (precond.info() != Eigen::Success) throw std::runtime_error("reference Hessian factorization failed");
  }

  std::vector<double> phi = compose(psi, t);
  double F = E.value(phi);
  if (std::isinf(F)) throw std::invalid_argument("initial potential is not convex");
  Eigen::VectorXd grad = E.gradient(phi);

  auto record = [&](int it, const std::string& phase, double step) {
    g.phi() = phi;
    IterationRecord rec;
    rec.iteration = it;
    rec.F = F;
    auto r = residuals(g, grad);
    rec.residual = r.interior;
    rec.boundary_residual = r.boundary;
    rec.phi_sup = sup_norm(phi);
    rec.step = step;
    rec.phase = phase;
    fill_min_det(g, rec);
    report.history.push_back(rec);
    report.residual = rec.residual;
    report.boundary_residual = rec.boundary_residual;
    if (options.observer) options.observer(rec, g);
  };
  record(0, "initial", 0.0);

  report.termination = Termination::kMaxIterations;
  for (int it = 1; it <= options.max_iter + 1; ++it) {
    if (report.residual < options.tol && report.boundary_residual < options.tol) {
      report.termination = Termination::kConverged;
      break;
    }
    if (it > options.max_iter) break;
    report.iterations = it;

    Eigen::VectorXd rhs = -grad;
    for (std::size_t k = 0; k < N; ++k)
      if (pinned[k]) rhs(static_cast<Eigen::Index>(k)) = 0;
    std::string phase = report.residual < options.newton_threshold ? "newton" : "descent";
    Eigen::VectorXd dir;
    if (phase == "newton") {
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> newton(pin(E.hessian(phi), pinned));
      if (newton.info() == Eigen::Success) dir = newton.solve(rhs);
      if (newton.info() != Eigen::Success || !(grad.dot(dir) < 0)) phase = "descent";
    }
    if (phase == "descent") dir = precond.solve(rhs);
    const double slope = grad.dot(dir);

    double alpha = 1.0, F_new = F;
    std::vector<double> psi_new(N);
    bool accepted = false;
    if (slope < 0) {
      while (alpha > 1e-14) {
        for (std::size_t k = 0; k < N; ++k) psi_new[k] = psi[k] + alpha * dir(static_cast<Eigen::Index>(k));
        F_new = E.value(compose(psi_new, t));
        if (F_new <= F + 1e-4 * alpha * slope) {
          accepted = true;
          break;
        }
        alpha *= 0.5;  // also the convexity safeguard: F = +inf outside the cone
      }
      if (!accepted && phase == "newton") {
        // Near the minimum the decrease drops below the rounding of F; take
        // the full step if F does not rise beyond rounding and the residual
        // shrinks.
        for (std::size_t k = 0; k < N; ++k) psi_new[k] = psi[k] + dir(static_cast<Eigen::Index>(k));
        auto phi_try = compose(psi_new, t);
        const double F_try = E.value(phi_try);
        if (F_try <= F + rounding(F)) {
          auto r_try = residuals(g, E.gradient(phi_try));
          if (std::max(r_try.interior, r_try.boundary) < std::max(report.residual, report.boundary_residual)) {
            accepted = true;
            alpha = 1.0;
          }
        }
      }
    }
    if (!accepted && futaki_zero) {
      report.termination = Termination::kStalled;
      report.message = "line search failed to decrease F";
      break;
    }
    if (accepted) psi = psi_new;

    if (!futaki_zero) {
      const double dt = t == 0 ? 1.0 : t;
      t += dt;
    } else {
      // Affine directions do not change F when the Futaki vector vanishes.
      psi = remove_affine_part(g, psi);
    }
    const double F_before = F;
    phi = compose(psi, t);
    F = E.value(phi);
    grad = E.gradient(phi);
    record(it, phase, accepted ? alpha : 0.0);

    if (report.history.back().phi_sup > ceiling && F < F_before) {
      auto cert = explain_divergence(P, sigma, g, options.crease_resolution);
      cert.ceiling = ceiling;
      cert.phi_sup = report.history.back().phi_sup;
      if (!futaki_zero) {
        cert.direction.assign(d.data(), d.data() + d.size());
        // L(<d, x>) = <d, Futaki>; lin_slope is its trapezoid value.
        for (int a = 0; a < g.dim(); ++a) cert.predicted_slope += d(a) * to_double(report.futaki[static_cast<std::size_t>(a)]);
        cert.observed_slope = (E.value(compose(psi, 2 * t)) - F) / t;
        if (std::abs(cert.observed_slope - lin_slope) > 1e-6 * (1.0 + std::abs(lin_slope)))
          report.message = "observed slope departs from the trapezoid value of L";
      }
      report.certificate = cert;
      report.termination = Termination::kDivergence;
      if (report.message.empty()) report.message = "||phi|| exceeded the ceiling while F kept decreasing";
      break;
    }
  }
  return report;
}

RaySlope ray_slope(const Polytope& P, const BoundaryMeasure& sigma, const Quadratic& f, double s_max,
                   const MeshParams& mesh, int rungs) {
  if (rungs < 2) throw std::invalid_argument("ray_slope needs at least two rungs");
  PotentialGrid g = guillemin(P, sigma, mesh);
  DiscreteEnergy E(g);
  std::vector<double> fv(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    Eigen::VectorXd x = g.point(k);
    double v = to_double(f.constant);
    for (int a = 0; a < g.dim(); ++a) {
      v += to_double(f.linear[static_cast<std::size_t>(a)]) * x(a);
      for (int b = 0; b < g.dim(); ++b)
        v += 0.5 * to_double(f.hessian[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]) * x(a) * x(b);
    }
    fv[k] = v;
  }
  RaySlope out;
  out.L = functional_L(P, sigma, f);
  for (int j = rungs - 1; j >= 0; --j) {
    const double s = s_max / std::pow(2.0, j);
    std::vector<double> phi(fv);
    for (double& v : phi) v *= s;
    const double F = E.value(phi);
    if (std::isinf(F)) throw ConvexityError(0, {s});
    out.ladder.push_back({s, F});
  }
  const auto& hi = out.ladder[out.ladder.size() - 1];
  const auto& lo = out.ladder[out.ladder.size() - 2];
  out.slope = (hi.F - lo.F) / (hi.s - lo.s);
  return out;
}

bool IbpCheck::within(double factor) const {
  const double floor = 1e-10 * (1.0 + std::abs(lhs));
  return std::abs(lhs - to_double(L_exact)) <= factor * std::max(quadrature_error, floor);
}

IbpCheck ibp_check(const PotentialGrid& g, const Quadratic& f) {
  for (int a = 0; a < g.dim(); ++a)
    if (g.axis(a).size() % 2 == 0) throw std::invalid_argument("ibp_check needs an odd node count per axis");
  const int n = g.dim();
  SmallMatrix Hf(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      Hf(a, b) = to_double(f.hessian[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]);

  DiscreteEnergy E(g);
  auto Q = E.inverses(g.phi());
  // Per-term integrand tr(u^{ab} f_ab) (tangential block on the boundary).
  std::vector<double> integrand(g.size(), 0.0);
  std::vector<char> has(g.size(), 0);
  for (std::size_t i = 0; i < E.terms().size(); ++i) {
    const auto& t = E.terms()[i];
    double v;
    if (t.tangential) {
      const int tang = 1 - normal_axis(g, t.node);
      v = Q[i](0, 0) * Hf(tang, tang);
    } else {
      v = Q[i].cwiseProduct(Hf).sum();
    }
    integrand[t.node] = v;
    has[t.node] = 1;
  }

  // Trapezoid weight of node k on the mesh using every stride-th node.
  auto mass = [&](std::size_t k, std::size_t stride) {
    auto ij = g.multi_index(k);
    double m = 1;
    for (int a = 0; a < n; ++a) {
      const auto& ax = g.axis(a);
      const std::size_t i = ij[static_cast<std::size_t>(a)];
      if (i % stride != 0) return 0.0;
      double w = 0;
      if (i >= stride) w += 0.5 * (ax[i] - ax[i - stride]);
      if (i + stride < ax.size()) w += 0.5 * (ax[i + stride] - ax[i]);
      m *= w;
    }
    return m;
  };

  IbpCheck c;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!has[k]) continue;
    c.lhs += mass(k, 1) * integrand[k];
    c.lhs_coarse += mass(k, 2) * integrand[k];
  }
  std::vector<double> fv(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    Eigen::VectorXd x = g.point(k);
    Point xr(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) xr[static_cast<std::size_t>(a)] = Rational(x(a));
    fv[k] = to_double(f(xr));
  }
  c.L_discrete = E.linear_part(fv);
  c.L_exact = functional_L(g.polytope(), g.sigma(), f);
  c.quadrature_error = std::abs(c.lhs - c.lhs_coarse);
  return c;
}

}  // namespace toric
