// toric: command-line front end. Every run writes manifest.json, report.json
// and CSV data into --out.

#include "toric/futaki.hpp"
#include "toric/kempfness.hpp"
#include "toric/parallel.hpp"
#include "toric/polytope_io.hpp"
#include "toric/solver.hpp"
#include "toric/stability.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#ifndef TORIC_VERSION
#define TORIC_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace toric;

namespace {

enum Exit : int {
  kOk = 0,
  kError = 1,
  kUnstable = 2,
  kFutakiNonzero = 3,
  kDivergence = 4,
  kNotConverged = 5,
};

json rational_json(const Rational& r) { return {{"exact", to_string(r)}, {"value", to_double(r)}}; }

json point_json(const Point& p) {
  json a = json::array();
  for (const auto& x : p) a.push_back(rational_json(x));
  return a;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// Whitespace- or comma-separated rationals.
std::vector<Rational> rationals_of(std::string s) {
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream is(s);
  std::vector<Rational> out;
  for (std::string t; is >> t;) out.push_back(parse_rational(t));
  return out;
}

// One run: output directory, manifest, report.
class Run {
 public:
  Run(std::string command, const std::string& out) : dir_(out) {
    fs::create_directories(dir_);
    manifest_["tool"] = "toric";
    manifest_["version"] = TORIC_VERSION;
    manifest_["command"] = std::move(command);
    manifest_["libraries"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                            "." + std::to_string(EIGEN_MINOR_VERSION)},
                              {"cli11", CLI11_VERSION},
                              {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                    std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                    std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
    manifest_["outputs"] = json::array();
  }

  void input(const std::string& role, const std::string& path) {
    manifest_["inputs"][role] = {{"path", path}, {"content", read_file(path)}};
  }
  json& parameters() { return manifest_["parameters"]; }
  json& report() { return report_; }

  std::ofstream open(const std::string& name) {
    manifest_["outputs"].push_back(name);
    std::ofstream f(dir_ / name);
    f << std::setprecision(17);
    return f;
  }

  int finish(int code) {
    report_["exit_code"] = code;
    manifest_["exit_code"] = code;
    manifest_["outputs"].push_back("report.json");
    std::ofstream(dir_ / "report.json") << report_.dump(2) << '\n';
    std::ofstream(dir_ / "manifest.json") << manifest_.dump(2) << '\n';
    return code;
  }

 private:
  fs::path dir_;
  json manifest_;
  json report_;
};

// ---------------------------------------------------------------- analyze

json analyze_json(const WeightedPolytope& wp) {
  const auto& P = wp.polytope;
  auto m = measures(P, wp.sigma);
  auto fut = futaki_linear(P, wp.sigma);
  json r;
  r["dimension"] = P.dim();
  r["vertices"] = json::array();
  for (const auto& v : P.vertices()) r["vertices"].push_back(to_string(v));
  r["facets"] = json::array();
  for (const auto& f : P.facets())
    r["facets"].push_back({{"normal", f.normal}, {"offset", to_string(f.offset)},
                           {"weight", to_string(wp.sigma.weight(f.tag))}});
  r["volume"] = rational_json(m.volume);
  r["boundary_volume"] = rational_json(m.boundary_volume);
  r["A"] = rational_json(m.A);
  r["centroid"] = point_json(m.centroid);
  r["boundary_centroid"] = point_json(m.boundary_centroid);
  r["delzant"] = is_delzant(P);
  r["futaki"] = point_json(fut);
  r["futaki_vanishes"] = futaki_vanishes(fut);
  if (!futaki_vanishes(fut))
    r["advice"] = "nonzero Futaki vector: solve will refuse (no constant scalar curvature potential exists)";
  return r;
}

int cmd_analyze(const std::string& path, const std::string& out) {
  Run run("analyze", out);
  run.input("polytope", path);
  auto wp = load_polytope(path);
  run.report() = analyze_json(wp);
  const auto& r = run.report();
  std::cout << "volume            " << r["volume"]["exact"].get<std::string>() << '\n'
            << "boundary volume   " << r["boundary_volume"]["exact"].get<std::string>() << '\n'
            << "A                 " << r["A"]["exact"].get<std::string>() << '\n'
            << "centroid          " << to_string(measures(wp.polytope, wp.sigma).centroid) << '\n'
            << "boundary centroid " << to_string(measures(wp.polytope, wp.sigma).boundary_centroid) << '\n'
            << "Delzant           " << (r["delzant"].get<bool>() ? "yes" : "no") << '\n'
            << "Futaki            " << to_string(futaki_linear(wp.polytope, wp.sigma)) << '\n';
  if (r.contains("advice")) std::cout << "advice            " << r["advice"].get<std::string>() << '\n';
  return run.finish(kOk);
}

// ------------------------------------------------------------ destabilize

json verdict_json(const StabilityVerdict& v) {
  json r;
  r["status"] = to_string(v.status);
  r["resolution"] = v.resolution;
  r["creases_examined"] = v.creases_examined;
  r["futaki"] = point_json(v.futaki);
  if (v.witness) {
    r["witness"] = v.witness->to_string();
    r["witness_L"] = rational_json(*v.witness_L);
    r["witness_is_linear"] = v.witness_is_linear;
  }
  r["best"] = json::array();
  for (const auto& c : v.best)
    r["best"].push_back({{"function", c.function().to_string()},
                         {"direction", c.direction},
                         {"offset", to_string(c.offset)},
                         {"L", rational_json(c.L)},
                         {"integral", rational_json(c.integral)},
                         {"ratio", rational_json(c.ratio)}});
  return r;
}

void write_creases(Run& run, const StabilityVerdict& v) {
  auto f = run.open("creases.csv");
  f << "rank,direction,offset,L,integral,ratio,L_value,ratio_value\n";
  int rank = 0;
  for (const auto& c : v.best) {
    std::string dir;
    for (std::size_t i = 0; i < c.direction.size(); ++i) dir += (i ? " " : "") + std::to_string(c.direction[i]);
    f << ++rank << ',' << dir << ',' << to_string(c.offset) << ',' << to_string(c.L) << ','
      << to_string(c.integral) << ',' << to_string(c.ratio) << ',' << to_double(c.L) << ',' << to_double(c.ratio)
      << '\n';
  }
}

int cmd_destabilize(const std::string& path, const std::string& out, int R, int keep, bool scan_all) {
  Run run("destabilize", out);
  run.input("polytope", path);
  run.parameters() = {{"resolution", R}, {"keep", keep}, {"scan_all", scan_all}};
  auto wp = load_polytope(path);
  CreaseSearchOptions opts;
  opts.keep = static_cast<std::size_t>(keep);
  opts.scan_when_futaki_nonzero = scan_all;
  auto v = crease_search(wp.polytope, wp.sigma, R, opts);
  run.report() = verdict_json(v);
  write_creases(run, v);
  std::cout << "status  " << to_string(v.status) << " (R = " << R << ", " << v.creases_examined << " creases)\n";
  if (v.witness) std::cout << "witness " << v.witness->to_string() << "  L = " << to_string(*v.witness_L) << '\n';
  return run.finish(kOk);
}

// ----------------------------------------------------------------- futaki

int cmd_futaki(const std::string& path, const std::string& out, const std::string& xi_text, int kmin, int kmax) {
  Run run("futaki", out);
  run.input("polytope", path);
  run.parameters() = {{"xi", xi_text}, {"k_min", kmin}, {"k_max", kmax}};
  auto wp = load_polytope(path);
  const auto& P = wp.polytope;
  IntVector xi;
  for (const auto& r : rationals_of(xi_text)) {
    if (denominator(r) != 1) throw std::invalid_argument("--xi entries must be integers");
    xi.push_back(numerator(r).convert_to<std::int64_t>());
  }
  if (xi.size() != static_cast<std::size_t>(P.dim())) throw std::invalid_argument("--xi has the wrong dimension");

  auto csv = run.open("weights.csv");
  csv << "k,d_k,w_k,F_k\n";
  for (int k = kmin; k <= kmax; ++k) {
    auto wd = count_and_weigh(P, xi, k);
    csv << k << ',' << wd.d_k.str() << ',' << wd.w_k.str() << ',' << to_double(wd.F_k) << '\n';
  }
  auto fit = expansion(P, xi, kmin, kmax);
  auto exact = exact_expansion(P, xi);
  AffineFunction lin{to_point(xi), Rational(0)};
  Rational L = functional_L(P, wp.sigma, lin);
  Rational vol = volume(P);

  json& r = run.report();
  r["fit"] = {{"F0", fit.F0}, {"F1", fit.F1}, {"F2", fit.F2}, {"residual", fit.residual},
              {"k_min", fit.k_min}, {"k_max", fit.k_max}};
  r["exact"] = {{"F0", rational_json(exact.F0)}, {"F1", rational_json(exact.F1)}};
  json dp = json::array(), wpj = json::array();
  for (const auto& c : exact.d_poly) dp.push_back(to_string(c));
  for (const auto& c : exact.w_poly) wpj.push_back(to_string(c));
  r["ehrhart_polynomial"] = dp;
  r["weight_polynomial"] = wpj;
  r["L_xi"] = rational_json(L);
  r["volume"] = rational_json(vol);
  if (L != 0) {
    r["normalized_ratio_fit"] = fit.F1 * to_double(vol) / to_double(L);
    r["normalized_ratio_exact"] = rational_json(exact.F1 * vol / L);
  }
  std::cout << "F1 (fit k=" << kmin << ".." << kmax << ") " << fit.F1 << '\n'
            << "F1 (exact)          " << to_string(exact.F1) << '\n'
            << "L(xi.x)             " << to_string(L) << '\n';
  if (L != 0) std::cout << "F1 Vol / L          " << to_string(exact.F1 * vol / L) << '\n';
  return run.finish(kOk);
}

// ------------------------------------------------------------- filtration

PLConvexFunction parse_pieces(const std::string& text, int dim) {
  std::vector<AffineFunction> pieces;
  std::string t = text;
  std::replace(t.begin(), t.end(), '|', ';');
  for (const auto& part : split(t, ';')) {
    auto v = rationals_of(part);
    if (v.empty()) continue;
    if (v.size() != static_cast<std::size_t>(dim) + 1)
      throw std::invalid_argument("each piece needs " + std::to_string(dim) + " gradient entries and a constant");
    AffineFunction a;
    a.gradient.assign(v.begin(), v.end() - 1);
    a.constant = v.back();
    pieces.push_back(a);
  }
  return PLConvexFunction(pieces);
}

int cmd_filtration(const std::string& path, const std::string& out, const std::string& pieces, int k) {
  Run run("filtration", out);
  run.input("polytope", path);
  run.parameters() = {{"pieces", pieces}, {"k", k}};
  auto wp = load_polytope(path);
  auto f = parse_pieces(pieces, wp.polytope.dim());
  auto csv = run.open("filtration.csv");
  csv << "k,d_k,weight,s_k\n";
  auto full = filtration_futaki(wp.polytope, f, k);
  json& r = run.report();
  r["function"] = f.to_string();
  r["s_k"] = rational_json(full.value);
  r["shift"] = to_string(full.shift);
  double best = to_double(full.value);
  if (k % 2 == 0) {
    auto half = filtration_futaki(wp.polytope, f, k / 2);
    csv << k / 2 << ',' << half.d_k.str() << ',' << half.weight.str() << ',' << to_double(half.value) << '\n';
    best = richardson(to_double(half.value), to_double(full.value));
    r["s_half_k"] = rational_json(half.value);
    r["richardson"] = best;
  }
  csv << k << ',' << full.d_k.str() << ',' << full.weight.str() << ',' << to_double(full.value) << '\n';
  Rational L = functional_L(wp.polytope, wp.sigma, f);
  Rational vol = volume(wp.polytope);
  r["L"] = rational_json(L);
  r["predicted_limit"] = rational_json(L / (2 * vol));
  std::cout << "s_k (k=" << k << ")        " << to_double(full.value) << '\n'
            << "extrapolated      " << best << '\n'
            << "L(f) / (2 Vol)    " << to_string(L / (2 * vol)) << '\n';
  return run.finish(kOk);
}

// ------------------------------------------------------------------ solve

struct SolveArgs {
  MeshParams mesh{128, 1.15, -1};
  double tol = 1e-5;
  int max_iter = 200;
  double ceiling = 0;
  bool allow_nonzero_futaki = false;
  double perturb = 0;
  int dump_every = 0;
  int resolution = 4;
};

json solve_json(const SolveReport& rep) {
  json r;
  r["termination"] = to_string(rep.termination);
  r["residual"] = rep.residual;
  r["boundary_residual"] = rep.boundary_residual;
  r["iterations"] = rep.iterations;
  r["futaki"] = point_json(rep.futaki);
  r["message"] = rep.message;
  if (!rep.history.empty()) {
    r["final_F"] = rep.history.back().F;
    r["min_det"] = rep.history.back().min_det;
    r["min_det_at"] = rep.history.back().min_det_at;
  }
  if (rep.certificate) {
    const auto& c = *rep.certificate;
    json j;
    j["direction"] = c.direction;
    j["observed_slope"] = c.observed_slope;
    j["predicted_slope"] = c.predicted_slope;
    j["phi_sup"] = c.phi_sup;
    j["ceiling"] = c.ceiling;
    if (c.destabilizer) {
      j["destabilizer"] = c.destabilizer->to_string();
      j["destabilizer_L"] = rational_json(*c.destabilizer_L);
    }
    if (c.correlated_crease) {
      j["correlated_crease"] = c.correlated_crease->function().to_string();
      j["correlated_crease_L"] = rational_json(c.correlated_crease->L);
      j["correlation"] = c.correlation;
    }
    r["certificate"] = j;
  }
  return r;
}

int solve_exit(Termination t) {
  switch (t) {
    case Termination::kConverged: return kOk;
    case Termination::kRefusedFutaki: return kFutakiNonzero;
    case Termination::kDivergence: return kDivergence;
    default: return kNotConverged;
  }
}

SolveReport run_solver(Run& run, const WeightedPolytope& wp, const SolveArgs& a) {
  SolveOptions o;
  o.tol = a.tol;
  o.max_iter = a.max_iter;
  if (a.ceiling > 0) o.ceiling = a.ceiling;
  o.require_zero_futaki = !a.allow_nonzero_futaki;
  o.crease_resolution = a.resolution;
  if (a.perturb != 0) {
    // amplitude * prod_i cos(2 pi (x_i - lo_i) / len_i)
    std::vector<std::pair<double, double>> box;
    for (int i = 0; i < wp.polytope.dim(); ++i) {
      double lo = 1e300, hi = -1e300;
      for (const auto& v : wp.polytope.vertices()) {
        lo = std::min(lo, to_double(v[static_cast<std::size_t>(i)]));
        hi = std::max(hi, to_double(v[static_cast<std::size_t>(i)]));
      }
      box.emplace_back(lo, hi - lo);
    }
    const double amp = a.perturb;
    o.initial = [box, amp](const Eigen::VectorXd& x) {
      double v = amp;
      for (std::size_t i = 0; i < box.size(); ++i)
        v *= std::cos(2 * M_PI * (x(static_cast<Eigen::Index>(i)) - box[i].first) / box[i].second);
      return v;
    };
  }
  auto history = run.open("history.csv");
  history << "iteration,phase,F,residual,boundary_residual,min_det,min_det_x1,min_det_x2,phi_sup,step\n";
  o.observer = [&](const IterationRecord& rec, const PotentialGrid& g) {
    history << rec.iteration << ',' << rec.phase << ',' << rec.F << ',' << rec.residual << ','
            << rec.boundary_residual << ',' << rec.min_det << ',' << (rec.min_det_at.empty() ? 0.0 : rec.min_det_at[0])
            << ',' << (rec.min_det_at.size() > 1 ? rec.min_det_at[1] : 0.0) << ',' << rec.phi_sup << ',' << rec.step
            << '\n';
    if (a.dump_every > 0 && rec.iteration % a.dump_every == 0) {
      auto f = run.open("grid_" + std::to_string(rec.iteration) + ".csv");
      write_grid_csv(f, g);
    }
  };
  auto rep = solve(wp.polytope, wp.sigma, a.mesh, o);
  if (rep.grid) {
    auto f = run.open("grid.csv");
    write_grid_csv(f, *rep.grid);
  }
  return rep;
}

void add_solve_options(CLI::App* sub, SolveArgs& a) {
  sub->add_option("--mesh", a.mesh.nodes, "Nodes per axis")->check(CLI::Range(5, 100000));
  sub->add_option("--ratio", a.mesh.ratio, "Geometric grading ratio toward the boundary");
  sub->add_option("--layers", a.mesh.layers, "Graded cells at each end (-1: automatic)");
  sub->add_option("--tol", a.tol, "Sup-residual tolerance");
  sub->add_option("--max-iter", a.max_iter, "Iteration limit");
  sub->add_option("--ceiling", a.ceiling, "Divergence ceiling for |phi| (0: 1e3 diam A)");
  sub->add_flag("--allow-nonzero-futaki", a.allow_nonzero_futaki,
                "Run even with a nonzero Futaki vector (expect a divergence certificate)");
  sub->add_option("--perturb", a.perturb, "Amplitude of the initial cosine perturbation of phi");
  sub->add_option("--dump-every", a.dump_every, "Write grid_<iter>.csv every N iterations");
  sub->add_option("--resolution", a.resolution, "Crease resolution used to explain a divergence");
}

void print_solve(const SolveReport& rep) {
  std::cout << "termination " << to_string(rep.termination) << '\n';
  if (!rep.message.empty()) std::cout << "message     " << rep.message << '\n';
  if (rep.grid) {
    std::cout << "iterations  " << rep.iterations << '\n'
              << "residual    " << rep.residual << " (boundary " << rep.boundary_residual << ")\n"
              << "F           " << rep.history.back().F << '\n';
  }
  if (rep.certificate && rep.certificate->destabilizer)
    std::cout << "destabilizer " << rep.certificate->destabilizer->to_string()
              << "  L = " << to_string(*rep.certificate->destabilizer_L) << '\n';
}

int cmd_solve(const std::string& path, const std::string& out, const SolveArgs& a) {
  Run run("solve", out);
  run.input("polytope", path);
  run.parameters() = {{"mesh", a.mesh.nodes}, {"ratio", a.mesh.ratio}, {"layers", a.mesh.layers},
                      {"tol", a.tol}, {"max_iter", a.max_iter}, {"ceiling", a.ceiling},
                      {"allow_nonzero_futaki", a.allow_nonzero_futaki}, {"perturb", a.perturb},
                      {"dump_every", a.dump_every}, {"resolution", a.resolution}};
  auto wp = load_polytope(path);
  auto rep = run_solver(run, wp, a);
  run.report() = solve_json(rep);
  print_solve(rep);
  return run.finish(solve_exit(rep.termination));
}

// -------------------------------------------------------------------- ray

Quadratic parse_quadratic(int n, const std::string& c, const std::string& b, const std::string& h) {
  Quadratic q = Quadratic::zero(n);
  if (!c.empty()) q.constant = parse_rational(c);
  if (!b.empty()) {
    auto v = rationals_of(b);
    if (v.size() != static_cast<std::size_t>(n)) throw std::invalid_argument("--linear needs n entries");
    q.linear = v;
  }
  if (!h.empty()) {
    auto v = rationals_of(h);
    if (v.size() != static_cast<std::size_t>(n * n)) throw std::invalid_argument("--hessian needs n*n entries");
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        q.hessian[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = v[static_cast<std::size_t>(i * n + j)];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (q.hessian[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] !=
            q.hessian[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)])
          throw std::invalid_argument("--hessian must be symmetric");
  }
  return q;
}

int cmd_ray(const std::string& path, const std::string& out, const std::string& c, const std::string& b,
            const std::string& h, double s_max, int mesh, int rungs) {
  Run run("ray", out);
  run.input("polytope", path);
  run.parameters() = {{"constant", c}, {"linear", b}, {"hessian", h}, {"s_max", s_max}, {"mesh", mesh},
                      {"rungs", rungs}};
  auto wp = load_polytope(path);
  auto q = parse_quadratic(wp.polytope.dim(), c, b, h);
  auto rs = ray_slope(wp.polytope, wp.sigma, q, s_max, MeshParams{mesh, 1.15, -1}, rungs);
  auto csv = run.open("ladder.csv");
  csv << "s,F\n";
  for (const auto& p : rs.ladder) csv << p.s << ',' << p.F << '\n';
  run.report() = {{"slope", rs.slope}, {"L", rational_json(rs.L)},
                  {"relative_gap", rs.L != 0 ? std::abs(rs.slope - to_double(rs.L)) / std::abs(to_double(rs.L))
                                             : std::abs(rs.slope)}};
  std::cout << "slope " << rs.slope << "\nL     " << to_string(rs.L) << '\n';
  return run.finish(kOk);
}

// ------------------------------------------------------------ flow-sphere

SphereConfig load_sphere(const std::string& path) {
  std::istringstream in(read_file(path));
  SphereConfig c;
  int line_no = 0;
  bool any_mult = false;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    std::istringstream is(line.substr(0, line.find('#')));
    std::vector<double> v;
    for (double x; is >> x;) v.push_back(x);
    if (!is.eof()) throw ParseError(line_no, "expected numbers");
    if (v.empty()) continue;
    if (v.size() != 3 && v.size() != 4) throw ParseError(line_no, "expected 'x y z [multiplicity]'");
    Eigen::Vector3d u(v[0], v[1], v[2]);
    if (u.norm() == 0) throw ParseError(line_no, "zero vector");
    c.points.push_back(u.normalized());
    c.multiplicity.push_back(v.size() == 4 ? v[3] : 1.0);
    any_mult = any_mult || v.size() == 4;
    if (!(c.multiplicity.back() > 0)) throw ParseError(line_no, "multiplicity must be positive");
  }
  if (c.points.empty()) throw ParseError(line_no, "no points");
  if (!any_mult) c.multiplicity.clear();
  return c;
}

int cmd_flow_sphere(const std::string& path, const std::string& out, double step, int max_steps) {
  Run run("flow-sphere", out);
  run.input("points", path);
  run.parameters() = {{"step", step}, {"max_steps", max_steps}};
  auto c = load_sphere(path);
  auto r = sphere_flow(c, step, max_steps);
  auto csv = run.open("trajectory.csv");
  csv << "step,point,x,y,z,moment_norm\n";
  for (const auto& s : r.trajectory)
    for (std::size_t i = 0; i < s.points.size(); ++i)
      csv << s.step << ',' << i << ',' << s.points[i].x() << ',' << s.points[i].y() << ',' << s.points[i].z() << ','
          << s.moment_norm << '\n';
  json& j = run.report();
  j["verdict"] = to_string(r.verdict);
  j["moment_norm"] = r.moment_norm;
  j["initial_moment_norm"] = r.initial_moment_norm;
  j["steps"] = r.steps;
  j["max_displacement"] = r.max_displacement;
  json pts = json::array();
  for (std::size_t i = 0; i < r.final.points.size(); ++i)
    pts.push_back({{"point", {r.final.points[i].x(), r.final.points[i].y(), r.final.points[i].z()}},
                   {"multiplicity", r.final.weight(i)}});
  j["final"] = pts;
  if (r.verdict != SphereVerdict::kBalanced)
    j["limit"] = {{"direction", {r.limit.direction.x(), r.limit.direction.y(), r.limit.direction.z()}},
                  {"weight_plus", r.limit.weight_plus},
                  {"weight_minus", r.limit.weight_minus},
                  {"max_deviation", r.limit.max_deviation}};
  std::cout << "verdict " << to_string(r.verdict) << "\n|mu|    " << r.moment_norm << "\nsteps   " << r.steps << '\n';
  if (r.verdict != SphereVerdict::kBalanced)
    std::cout << "limit   weight " << r.limit.weight_plus << " at p, " << r.limit.weight_minus << " at -p\n";
  return run.finish(kOk);
}

// ------------------------------------------------------------ flow-matrix

Eigen::MatrixXcd load_matrix(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<std::vector<std::complex<double>>> rows;
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    std::istringstream is(line.substr(0, line.find('#')));
    std::vector<std::complex<double>> row;
    for (std::string t; is >> t;) {
      std::istringstream ts(t);
      std::complex<double> z;
      if (t.front() == '(') {
        ts >> z;
      } else {
        double re;
        ts >> re;
        z = re;
      }
      if (ts.fail() || !(ts >> std::ws).eof()) throw ParseError(line_no, "bad entry '" + t + "'");
      row.push_back(z);
    }
    if (!row.empty()) rows.push_back(row);
  }
  const auto n = rows.size();
  if (n == 0) throw ParseError(line_no, "empty matrix");
  Eigen::MatrixXcd A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) throw ParseError(static_cast<int>(i + 1), "matrix must be square");
    for (std::size_t j = 0; j < n; ++j) A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return A;
}

json matrix_json(const Eigen::MatrixXcd& A) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < A.cols(); ++j) row.push_back({A(i, j).real(), A(i, j).imag()});
    rows.push_back(row);
  }
  return rows;
}

int cmd_flow_matrix(const std::string& path, const std::string& out, double step, int max_steps) {
  Run run("flow-matrix", out);
  run.input("matrix", path);
  run.parameters() = {{"step", step}, {"max_steps", max_steps}};
  auto A = load_matrix(path);
  auto r = matrix_flow(A, step, max_steps);
  auto csv = run.open("trajectory.csv");
  csv << "step,commutator_norm,frobenius_norm\n";
  for (const auto& s : r.trajectory) csv << s.step << ',' << s.commutator_norm << ',' << s.frobenius_norm << '\n';
  json& j = run.report();
  j["verdict"] = to_string(r.verdict);
  j["commutator_norm"] = r.commutator_norm;
  j["frobenius_norm"] = r.limit.norm();
  j["eigenvalue_drift"] = r.eigenvalue_drift;
  // Nilpotent input: the orbit closure contains 0.
  j["collapses_to_zero"] = r.limit.norm() < 1e-6 * A.norm();
  j["steps"] = r.steps;
  j["limit"] = matrix_json(r.limit);
  json ev = json::array();
  for (const auto& z : sorted_eigenvalues(r.limit)) ev.push_back({z.real(), z.imag()});
  j["eigenvalues"] = ev;
  std::cout << "verdict          " << to_string(r.verdict) << "\n||[A,A*]||       " << r.commutator_norm
            << "\n||A||            " << r.limit.norm() << "\neigenvalue drift " << r.eigenvalue_drift << '\n';
  return run.finish(kOk);
}

// --------------------------------------------------------------- pipeline

int cmd_pipeline(const std::string& path, const std::string& out, int R, const SolveArgs& a) {
  Run run("pipeline", out);
  run.input("polytope", path);
  run.parameters() = {{"resolution", R}, {"mesh", a.mesh.nodes}, {"tol", a.tol}, {"max_iter", a.max_iter},
                      {"perturb", a.perturb}};
  auto wp = load_polytope(path);
  json& r = run.report();
  r["analyze"] = analyze_json(wp);
  auto fut = futaki_linear(wp.polytope, wp.sigma);
  if (!futaki_vanishes(fut)) {
    std::cout << "stage analyze: Futaki vector " << to_string(fut) << " is nonzero\n";
    r["stage"] = "analyze";
    return run.finish(kFutakiNonzero);
  }
  auto v = crease_search(wp.polytope, wp.sigma, R);
  r["destabilize"] = verdict_json(v);
  write_creases(run, v);
  if (v.status == StabilityStatus::kUnstable) {
    std::cout << "stage destabilize: unstable, witness " << v.witness->to_string()
              << "  L = " << to_string(*v.witness_L) << '\n';
    r["stage"] = "destabilize";
    return run.finish(kUnstable);
  }
  std::cout << "stage destabilize: " << to_string(v.status) << " at R = " << R << '\n';
  auto rep = run_solver(run, wp, a);
  r["solve"] = solve_json(rep);
  r["stage"] = "solve";
  print_solve(rep);
  if (rep.termination == Termination::kDivergence) {
    r["anomaly"] = "crease search found no destabilizer but the solver diverged";
    std::cerr << "anomaly: " << r["anomaly"].get<std::string>() << '\n';
  }
  return run.finish(solve_exit(rep.termination));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Toric K-stability and constant scalar curvature toolkit"};
  app.set_version_flag("--version", std::string("toric ") + TORIC_VERSION);
  app.require_subcommand(1);
  std::string out = "toric-out";
  app.add_option("-o,--out", out, "Output directory")->capture_default_str();
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "Recorded in the manifest; no subcommand draws random numbers");

  std::string path;
  auto* analyze = app.add_subcommand("analyze", "Measures, Delzant test and Futaki vector of a polytope");
  analyze->add_option("polytope", path, "Polytope file")->required()->check(CLI::ExistingFile);

  int R = 4, keep = 10;
  bool scan_all = false;
  auto* destab = app.add_subcommand("destabilize", "Search crease functions for L(f) < 0");
  destab->add_option("polytope", path, "Polytope file")->required()->check(CLI::ExistingFile);
  destab->add_option("-R,--resolution", R, "Crease height and offset denominator bound")->check(CLI::PositiveNumber);
  destab->add_option("--keep", keep, "Number of best creases reported");
  destab->add_flag("--scan-all", scan_all, "Scan creases even when the Futaki vector already decides");

  std::string xi;
  int kmin = 10, kmax = 40;
  auto* fut = app.add_subcommand("futaki", "Weight expansion from lattice-point counts");
  fut->add_option("polytope", path, "Polytope file (integral vertices)")->required()->check(CLI::ExistingFile);
  fut->add_option("--xi", xi, "Integer generator, e.g. \"1 0\"")->required();
  fut->add_option("--kmin", kmin, "Smallest k in the fit");
  fut->add_option("--kmax", kmax, "Largest k in the fit");

  std::string pieces;
  int fk = 256;
  auto* filt = app.add_subcommand("filtration", "Filtration statistic of a PL convex function");
  filt->add_option("polytope", path, "Polytope file (integral vertices)")->required()->check(CLI::ExistingFile);
  filt->add_option("--pieces", pieces, "Affine pieces 'g1 .. gn c; ...' of f = max ('|' also separates)")->required();
  filt->add_option("-k", fk, "Level k (even k adds the Richardson value from k/2)")->check(CLI::PositiveNumber);

  SolveArgs sargs;
  auto* solve_cmd = app.add_subcommand("solve", "Minimize the Mabuchi energy on a box");
  solve_cmd->add_option("polytope", path, "Polytope file (interval or axis-parallel rectangle)")
      ->required()
      ->check(CLI::ExistingFile);
  add_solve_options(solve_cmd, sargs);

  std::string qc, qb, qh;
  double s_max = 1000;
  int rmesh = 257, rungs = 8;
  auto* ray = app.add_subcommand("ray", "Slope of the Mabuchi energy along u0 + s f");
  ray->add_option("polytope", path, "Polytope file (interval or axis-parallel rectangle)")
      ->required()
      ->check(CLI::ExistingFile);
  ray->add_option("--constant", qc, "Constant term of f");
  ray->add_option("--linear", qb, "Linear coefficients of f");
  ray->add_option("--hessian", qh, "Hessian of f, row-major");
  ray->add_option("--smax", s_max, "Largest s on the ladder");
  ray->add_option("--mesh", rmesh, "Nodes per axis");
  ray->add_option("--rungs", rungs, "Ladder length");

  std::string points_path, matrix_path;
  double step = 0.1;
  int max_steps = 10000;
  auto* fs_cmd = app.add_subcommand("flow-sphere", "Gradient flow of |mu|^2 for points on the sphere");
  fs_cmd->add_option("--points", points_path, "Points file")->required()->check(CLI::ExistingFile);
  fs_cmd->add_option("--step", step, "Initial (and largest) step");
  fs_cmd->add_option("--max-steps", max_steps, "Step limit");

  auto* fm_cmd = app.add_subcommand("flow-matrix", "Gradient flow of ||[A,A*]||^2 on a conjugation orbit");
  fm_cmd->add_option("--matrix", matrix_path, "Matrix file")->required()->check(CLI::ExistingFile);
  fm_cmd->add_option("--step", step, "Initial step");
  fm_cmd->add_option("--max-steps", max_steps, "Step limit");

  SolveArgs pargs;
  pargs.mesh.nodes = 64;
  pargs.perturb = 0.05;
  auto* pipe = app.add_subcommand("pipeline", "Futaki test, crease search, then solve");
  pipe->add_option("polytope", path, "Polytope file")->required()->check(CLI::ExistingFile);
  add_solve_options(pipe, pargs);
  pipe->get_option("--resolution")->description("Crease resolution for the search and for explaining a divergence");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kError;
  }

  try {
    int code = kError;
    if (*analyze) code = cmd_analyze(path, out);
    if (*destab) code = cmd_destabilize(path, out, R, keep, scan_all);
    if (*fut) code = cmd_futaki(path, out, xi, kmin, kmax);
    if (*filt) code = cmd_filtration(path, out, pieces, fk);
    if (*solve_cmd) code = cmd_solve(path, out, sargs);
    if (*ray) code = cmd_ray(path, out, qc, qb, qh, s_max, rmesh, rungs);
    if (*fs_cmd) code = cmd_flow_sphere(points_path, out, step, max_steps);
    if (*fm_cmd) code = cmd_flow_matrix(matrix_path, out, step, max_steps);
    if (*pipe) code = cmd_pipeline(path, out, pargs.resolution, pargs);
    return code;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return kError;
}
