#include "gpelab/assembly.hpp"

namespace gpelab::fem {

RealTridiagonal assemble_mass(const Mesh1D& mesh) {
  const std::size_t n = mesh.size();
  RealTridiagonal M(n);
  for (std::size_t e = 0; e + 1 < n; ++e) {
    const double h = mesh.spacing(e);
    M.diag[e] += h / 3.0;
    M.diag[e + 1] += h / 3.0;
    M.super[e] += h / 6.0;
    M.sub[e + 1] += h / 6.0;
  }
  return M;
}

RealTridiagonal assemble_stiffness(const Mesh1D& mesh) {
  const std::size_t n = mesh.size();
  RealTridiagonal K(n);
  for (std::size_t e = 0; e + 1 < n; ++e) {
    const double w = 1.0 / mesh.spacing(e);
    K.diag[e] += w;
    K.diag[e + 1] += w;
    K.super[e] -= w;
    K.sub[e + 1] -= w;
  }
  return K;
}

RealTridiagonal delta_term(const Mesh1D& mesh, double q) {
  RealTridiagonal D(mesh.size());
  D.diag[mesh.origin_index()] = q;
  return D;
}

}  // namespace gpelab::fem
