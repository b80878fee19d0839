// Text format for polytopes with boundary weights. Grammar in docs/formats.md.
#pragma once

#include "toric/polytope.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>

namespace toric {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct WeightedPolytope {
  Polytope polytope;
  BoundaryMeasure sigma;
};

WeightedPolytope parse_polytope(std::istream& in);
WeightedPolytope parse_polytope(const std::string& text);
WeightedPolytope load_polytope(const std::string& path);

/// Writes the facets form, which round-trips exactly (tags become line order).
std::string format_polytope(const Polytope& P, const BoundaryMeasure& sigma);

}  // namespace toric
