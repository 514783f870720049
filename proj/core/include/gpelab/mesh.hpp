#pragma once

#include <cstddef>
#include <memory>
#include <vector>

namespace gpelab::fem {

/// Symmetric hat-function mesh on [-R, R].
///
/// Spacing is uniform h_out = (R - 1/2)/outer_elems outside the window
/// [-1/2, 1/2] and uniform h_in = (1/2)/inner_elems <= h_out inside it.
/// Nodes fall exactly on -R, -1/2, 0, 1/2, R, and the node array is
/// mirror-symmetric bit for bit (nodes[i] == -nodes[n-1-i]).
class Mesh1D {
 public:
  /// Builds the refined mesh. Requires R > 1, outer_elems >= 2,
  /// inner_elems >= 2 and h_in <= h_out.
  static std::shared_ptr<const Mesh1D> build(double R, int outer_elems,
                                             int inner_elems);

  /// Rebuilds a mesh from an explicit node list (snapshot reload).
  /// Validates strict ordering, mirror symmetry and the presence of
  /// nodes at 0 and +-1/2.
  static std::shared_ptr<const Mesh1D> from_nodes(std::vector<double> nodes);

  const std::vector<double>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  double node(std::size_t i) const { return nodes_[i]; }
  double extent() const { return nodes_.back(); }

  /// Element width x[i+1] - x[i].
  double spacing(std::size_t element) const {
    return nodes_[element + 1] - nodes_[element];
  }

  std::size_t origin_index() const { return origin_; }
  std::size_t window_lo_index() const { return window_lo_; }  // node -1/2
  std::size_t window_hi_index() const { return window_hi_; }  // node +1/2

  /// Index of the node equal to x (within 1e-9); throws if x is not a node.
  std::size_t index_of(double x) const;

  /// Index of the largest node <= x (clamped to [0, size()-1]).
  std::size_t lower_index(double x) const;

 private:
  explicit Mesh1D(std::vector<double> nodes);

  std::vector<double> nodes_;
  std::size_t origin_ = 0;
  std::size_t window_lo_ = 0;
  std::size_t window_hi_ = 0;
};

/// Convenience wrapper for Mesh1D::build.
std::shared_ptr<const Mesh1D> build_mesh(double R, int outer_elems,
                                         int inner_elems);

}  // namespace gpelab::fem
