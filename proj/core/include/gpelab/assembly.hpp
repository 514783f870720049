#pragma once

#include "gpelab/mesh.hpp"
#include "gpelab/tridiagonal.hpp"

namespace gpelab::fem {

/// Hat-basis mass matrix: M[i][i] = (h_left + h_right)/3, M[i][i+-1] = h/6,
/// with one-sided contributions on the boundary rows. Row sums equal the
/// local trapezoid weights.
RealTridiagonal assemble_mass(const Mesh1D& mesh);

/// Hat-basis stiffness matrix: K[i][i] = 1/h_left + 1/h_right,
/// K[i][i+-1] = -1/h, one-sided on the boundary rows. Annihilates constant
/// vectors and is positive semidefinite. Dirichlet rows are imposed by the
/// time stepper, not here.
RealTridiagonal assemble_stiffness(const Mesh1D& mesh);

/// Point-potential pairing: a single diagonal entry q at the origin node.
RealTridiagonal delta_term(const Mesh1D& mesh, double q);

}  // namespace gpelab::fem
