#include "gpelab/field.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gpelab/errors.hpp"

namespace gpelab::fem {

ComplexField project(std::shared_ptr<const Mesh1D> mesh,
                     const std::function<cplx(double)>& f) {
  ComplexField u;
  u.mesh = std::move(mesh);
  u.values.reserve(u.mesh->size());
  for (double x : u.mesh->nodes()) {
    u.values.push_back(f(x));
  }
  return u;
}

double discrete_mass(const ComplexField& u, const RealTridiagonal& mass) {
  if (u.values.size() != mass.size()) {
    throw std::invalid_argument("field/matrix size mismatch");
  }
  std::vector<cplx> mu(u.values.size());
  matvec(mass, u.values, mu);
  cplx form = 0.0;
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    form += std::conj(u.values[i]) * mu[i];
  }
  const double scale = std::max(std::abs(form.real()), 1.0);
  if (std::abs(form.imag()) > 1e-10 * scale) {
    throw NumericalError("discrete mass has imaginary residue " +
                         std::to_string(form.imag()));
  }
  return form.real();
}

cplx interpolate(const ComplexField& u, double x) {
  const Mesh1D& mesh = *u.mesh;
  if (x < mesh.nodes().front() || x > mesh.nodes().back()) return 0.0;
  const std::size_t i = mesh.lower_index(x);
  if (i + 1 >= mesh.size()) return u.values.back();
  const double h = mesh.spacing(i);
  const double s = (x - mesh.node(i)) / h;
  return u.values[i] * (1.0 - s) + u.values[i + 1] * s;
}

}  // namespace gpelab::fem
