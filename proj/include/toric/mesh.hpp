// One-dimensional graded meshes: spacing shrinks geometrically toward both
// endpoints and is uniform in the middle. Tensor products of these cover the
// box domains the solver handles.
#pragma once

#include <cstddef>
#include <vector>

namespace toric {

struct MeshParams {
  int nodes = 128;      // per axis, endpoints included
  double ratio = 1.15;  // growth factor between neighbouring cells in a layer
  /// Graded cells at each end; negative picks min(20, (nodes - 1) / 4).
  int layers = -1;

  static MeshParams uniform(int nodes) { return {nodes, 1.0, 0}; }
};

class GradedMesh1D {
 public:
  GradedMesh1D(double lo, double hi, const MeshParams& params);

  std::size_t size() const { return x_.size(); }
  double operator[](std::size_t i) const { return x_[i]; }
  const std::vector<double>& nodes() const { return x_; }
  double lo() const { return x_.front(); }
  double hi() const { return x_.back(); }

  /// x[i+1] - x[i].
  double gap(std::size_t i) const { return x_[i + 1] - x_[i]; }
  /// Trapezoid weight: half the sum of the adjacent gaps.
  double mass(std::size_t i) const;
  double max_gap() const;
  double min_gap() const;
  /// Number of cells between node i and the nearer endpoint.
  std::size_t layer(std::size_t i) const { return i < size() - 1 - i ? i : size() - 1 - i; }

 private:
  std::vector<double> x_;
};

}  // namespace toric
