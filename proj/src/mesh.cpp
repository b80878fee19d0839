#include "toric/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace toric {

GradedMesh1D::GradedMesh1D(double lo, double hi, const MeshParams& params) {
  if (!(hi > lo)) throw std::invalid_argument("mesh: empty interval");
  if (params.nodes < 3) throw std::invalid_argument("mesh: need at least 3 nodes");
  if (params.ratio < 1.0) throw std::invalid_argument("mesh: ratio must be >= 1");
  const int cells = params.nodes - 1;
  int g = params.layers < 0 ? std::min(20, cells / 4) : params.layers;
  if (2 * g > cells) throw std::invalid_argument("mesh: too many graded layers for the node count");

  // Cell widths in units of the coarse spacing h.
  std::vector<double> w(static_cast<std::size_t>(cells), 1.0);
  for (int j = 0; j < g; ++j) {
    const double s = std::pow(params.ratio, -(g - j));
    w[static_cast<std::size_t>(j)] = s;
    w[static_cast<std::size_t>(cells - 1 - j)] = s;
  }
  double total = 0;
  for (double v : w) total += v;
  const double h = (hi - lo) / total;

  x_.resize(static_cast<std::size_t>(params.nodes));
  x_[0] = lo;
  for (std::size_t i = 0; i < w.size(); ++i) x_[i + 1] = x_[i] + w[i] * h;
  // Mirror the left half so the mesh is symmetric to the last bit.
  const std::size_t n = x_.size();
  for (std::size_t i = 0; i < n / 2; ++i) x_[n - 1 - i] = (lo + hi) - x_[i];
  if (n % 2 == 1) x_[n / 2] = 0.5 * (lo + hi);
  x_.front() = lo;
  x_.back() = hi;
}

double GradedMesh1D::mass(std::size_t i) const {
  double m = 0;
  if (i > 0) m += 0.5 * gap(i - 1);
  if (i + 1 < size()) m += 0.5 * gap(i);
  return m;
}

double GradedMesh1D::max_gap() const {
  double g = 0;
  for (std::size_t i = 0; i + 1 < size(); ++i) g = std::max(g, gap(i));
  return g;
}

double GradedMesh1D::min_gap() const {
  double g = gap(0);
  for (std::size_t i = 0; i + 1 < size(); ++i) g = std::min(g, gap(i));
  return g;
}

}  // namespace toric
