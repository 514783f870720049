#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <vector>

#include "gpelab/mesh.hpp"
#include "gpelab/tridiagonal.hpp"

namespace gpelab::fem {

using cplx = std::complex<double>;

/// Nodal coefficients of a piecewise-linear complex field on a mesh.
struct ComplexField {
  std::shared_ptr<const Mesh1D> mesh;
  std::vector<cplx> values;
};

/// Nodal interpolation of f onto the mesh.
ComplexField project(std::shared_ptr<const Mesh1D> mesh,
                     const std::function<cplx(double)>& f);

/// Discrete mass u* M u (squared L2 norm of the interpolant).
/// Signals NumericalError if the imaginary residue of the quadratic form
/// exceeds 1e-10 relative to the mass.
double discrete_mass(const ComplexField& u, const RealTridiagonal& mass);

/// Value of the piecewise-linear interpolant at x (0 outside the mesh).
cplx interpolate(const ComplexField& u, double x);

}  // namespace gpelab::fem
