#include "toric/polytope_io.hpp"

#include <fstream>
#include <sstream>
#include <vector>

namespace toric {
namespace {

std::vector<std::string> tokens_of(const std::string& line) {
  std::istringstream is(line.substr(0, line.find('#')));
  std::vector<std::string> out;
  for (std::string t; is >> t;) out.push_back(t);
  return out;
}

Rational rational_at(const std::string& token, int line) {
  try {
    return parse_rational(token);
  } catch (const std::invalid_argument& e) {
    throw ParseError(line, e.what());
  }
}

}  // namespace

WeightedPolytope parse_polytope(std::istream& in) {
  int dim = 0;
  enum class Mode { kNone, kVertices, kFacets } mode = Mode::kNone;
  std::vector<Point> points;
  std::vector<Facet> facets;
  std::vector<Rational> weights;
  int line_no = 0;
  int last_line = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    auto tok = tokens_of(line);
    if (tok.empty()) continue;
    last_line = line_no;
    if (tok[0] == "dim") {
      if (tok.size() != 2) throw ParseError(line_no, "expected 'dim <n>'");
      try {
        dim = std::stoi(tok[1]);
      } catch (const std::exception&) {
        throw ParseError(line_no, "dimension must be an integer");
      }
      if (dim < 1) throw ParseError(line_no, "dimension must be positive");
      continue;
    }
    if (tok[0] == "vertices" || tok[0] == "facets") {
      if (dim == 0) throw ParseError(line_no, "'dim' must precede the '" + tok[0] + "' section");
      if (mode != Mode::kNone) throw ParseError(line_no, "only one of 'vertices' or 'facets' may appear");
      mode = tok[0] == "vertices" ? Mode::kVertices : Mode::kFacets;
      continue;
    }
    const auto n = static_cast<std::size_t>(dim);
    if (mode == Mode::kVertices) {
      if (tok.size() != n) throw ParseError(line_no, "expected " + std::to_string(n) + " coordinates");
      Point p;
      for (const auto& t : tok) p.push_back(rational_at(t, line_no));
      points.push_back(p);
    } else if (mode == Mode::kFacets) {
      if (tok.size() != n + 1 && tok.size() != n + 2)
        throw ParseError(line_no, "expected '<normal x" + std::to_string(n) + "> <offset> [weight]'");
      Facet f;
      for (std::size_t i = 0; i < n; ++i) {
        Rational v = rational_at(tok[i], line_no);
        if (denominator(v) != 1) throw ParseError(line_no, "facet normal entries must be integers");
        f.normal.push_back(numerator(v).convert_to<std::int64_t>());
      }
      f.offset = rational_at(tok[n], line_no);
      Rational w = tok.size() == n + 2 ? rational_at(tok[n + 1], line_no) : Rational(1);
      if (w <= 0) throw ParseError(line_no, "boundary weight must be positive");
      auto g = gcd_of(f.normal);
      if (g == 0) throw ParseError(line_no, "facet normal is zero");
      if (g != 1) {
        std::ostringstream fix;
        for (auto x : f.normal) fix << x / g << ' ';
        fix << to_string(f.offset / g);
        throw ParseError(line_no, "facet normal is not primitive (gcd " + std::to_string(g) +
                                      "); divide the inequality by " + std::to_string(g) + ": '" + fix.str() + "'");
      }
      f.tag = static_cast<int>(facets.size());
      facets.push_back(f);
      weights.push_back(w);
    } else {
      throw ParseError(line_no, "unexpected '" + tok[0] + "'; expected 'dim', 'vertices' or 'facets'");
    }
  }
  if (mode == Mode::kNone) throw ParseError(last_line, "missing 'vertices' or 'facets' section");
  try {
    if (mode == Mode::kVertices) {
      auto P = Polytope::from_vertices(dim, points);
      return {P, BoundaryMeasure::uniform(P)};
    }
    auto P = Polytope::from_facets(dim, facets);
    if (P.facets().size() != facets.size())
      throw ParseError(last_line, "facet list contains redundant inequalities");
    return {P, BoundaryMeasure{weights}};
  } catch (const GeometryError& e) {
    throw ParseError(last_line, e.what());
  }
}

WeightedPolytope parse_polytope(const std::string& text) {
  std::istringstream is(text);
  return parse_polytope(is);
}

WeightedPolytope load_polytope(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open polytope file '" + path + "'");
  return parse_polytope(in);
}

std::string format_polytope(const Polytope& P, const BoundaryMeasure& sigma) {
  std::ostringstream os;
  os << "dim " << P.dim() << "\nfacets\n";
  // Emit in tag order so weights line up with the parser's numbering.
  std::vector<const Facet*> by_tag(P.tag_count(), nullptr);
  for (const auto& f : P.facets())
    if (f.tag >= 0) by_tag[static_cast<std::size_t>(f.tag)] = &f;
  for (const auto* f : by_tag) {
    if (!f) continue;
    for (auto x : f->normal) os << x << ' ';
    os << to_string(f->offset) << ' ' << to_string(sigma.weight(f->tag)) << '\n';
  }
  return os.str();
}

}  // namespace toric
