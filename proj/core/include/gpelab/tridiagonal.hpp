#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace gpelab::fem {

/// Tridiagonal matrix stored as three diagonals; sub[0] and super[n-1]
/// are unused and stay zero.
template <class T>
struct Tridiagonal {
  std::vector<T> sub, diag, super;

  Tridiagonal() = default;
  explicit Tridiagonal(std::size_t n) : sub(n), diag(n), super(n) {}

  std::size_t size() const { return diag.size(); }
};

using RealTridiagonal = Tridiagonal<double>;
using ComplexTridiagonal = Tridiagonal<std::complex<double>>;

/// y = A x.
template <class T>
void matvec(const Tridiagonal<T>& A, std::span<const std::complex<double>> x,
            std::span<std::complex<double>> y) {
  const std::size_t n = A.size();
  if (n == 0) return;
  if (n == 1) {
    y[0] = A.diag[0] * x[0];
    return;
  }
  y[0] = A.diag[0] * x[0] + A.super[0] * x[1];
  for (std::size_t i = 1; i + 1 < n; ++i)
    y[i] = A.sub[i] * x[i - 1] + A.diag[i] * x[i] + A.super[i] * x[i + 1];
  y[n - 1] = A.sub[n - 1] * x[n - 2] + A.diag[n - 1] * x[n - 1];
}

}  // namespace gpelab::fem
