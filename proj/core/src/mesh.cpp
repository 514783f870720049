#include "gpelab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gpelab/errors.hpp"

namespace gpelab::fem {
namespace {

std::size_t find_exact(const std::vector<double>& nodes, double x,
                       const char* what) {
  const auto it = std::lower_bound(nodes.begin(), nodes.end(), x);
  if (it == nodes.end() || *it != x) {
    throw std::invalid_argument(std::string("mesh is missing a node at ") +
                                what);
  }
  return static_cast<std::size_t>(it - nodes.begin());
}

}  // namespace

Mesh1D::Mesh1D(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  origin_ = find_exact(nodes_, 0.0, "0");
  window_lo_ = find_exact(nodes_, -0.5, "-1/2");
  window_hi_ = find_exact(nodes_, 0.5, "+1/2");
}

std::shared_ptr<const Mesh1D> Mesh1D::build(double R, int outer_elems,
                                            int inner_elems) {
  if (!(R > 1.0)) {
    throw std::invalid_argument("mesh half-width must exceed 1, got " +
                                std::to_string(R));
  }
  if (outer_elems < 2 || inner_elems < 2) {
    throw std::invalid_argument("mesh needs at least 2 elements per zone");
  }
  const double h_in = 0.5 / inner_elems;
  const double h_out = (R - 0.5) / outer_elems;
  if (h_in > h_out * (1.0 + 1e-12)) {
    throw std::invalid_argument(
        "refinement window must not be coarser than the outer zone (h_in=" +
        std::to_string(h_in) + ", h_out=" + std::to_string(h_out) + ")");
  }

  // Build the nonnegative half with exact endpoints, then mirror by
  // negation so the node array is symmetric bit for bit.
  std::vector<double> half;
  half.reserve(static_cast<std::size_t>(inner_elems + outer_elems) + 1);
  for (int j = 0; j <= inner_elems; ++j) {
    half.push_back(0.5 * j / inner_elems);
  }
  half.back() = 0.5;
  for (int k = 1; k <= outer_elems; ++k) {
    half.push_back(0.5 + (R - 0.5) * k / outer_elems);
  }
  half.back() = R;

  std::vector<double> nodes;
  nodes.reserve(2 * half.size() - 1);
  for (std::size_t i = half.size(); i-- > 1;) {
    nodes.push_back(-half[i]);
  }
  nodes.insert(nodes.end(), half.begin(), half.end());
  return std::shared_ptr<const Mesh1D>(new Mesh1D(std::move(nodes)));
}

std::shared_ptr<const Mesh1D> Mesh1D::from_nodes(std::vector<double> nodes) {
  if (nodes.size() < 5) {
    throw std::invalid_argument("mesh needs at least 5 nodes, got " +
                                std::to_string(nodes.size()));
  }
  const std::size_t n = nodes.size();
  for (std::size_t i = 1; i < n; ++i) {
    if (!(nodes[i] > nodes[i - 1])) {
      throw std::invalid_argument("mesh nodes must be strictly increasing");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (nodes[i] != -nodes[n - 1 - i]) {
      throw std::invalid_argument("mesh nodes must be symmetric about 0");
    }
  }
  return std::shared_ptr<const Mesh1D>(new Mesh1D(std::move(nodes)));
}

std::size_t Mesh1D::index_of(double x) const {
  const std::size_t i = lower_index(x);
  if (std::abs(nodes_[i] - x) <= 1e-9) return i;
  if (i + 1 < nodes_.size() && std::abs(nodes_[i + 1] - x) <= 1e-9) {
    return i + 1;
  }
  throw std::invalid_argument(std::to_string(x) + " is not a mesh node");
}

std::size_t Mesh1D::lower_index(double x) const {
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
  if (it == nodes_.begin()) return 0;
  return static_cast<std::size_t>(it - nodes_.begin()) - 1;
}

std::shared_ptr<const Mesh1D> build_mesh(double R, int outer_elems,
                                         int inner_elems) {
  return Mesh1D::build(R, outer_elems, inner_elems);
}

}  // namespace gpelab::fem
