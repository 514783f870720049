#include "gpelab/special.hpp"

#include <cmath>
#include <numbers>

namespace gpelab {
namespace {

// Lanczos coefficients for g = 7, n = 9.
constexpr double kLanczos[9] = {
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
};

}  // namespace

std::complex<double> complex_gamma(std::complex<double> z) {
  using std::numbers::pi;
  if (z.real() < 0.5) {
    // Gamma(z) Gamma(1 - z) = pi / sin(pi z); poles surface as inf/nan.
    return pi / (std::sin(pi * z) * complex_gamma(1.0 - z));
  }
  z -= 1.0;
  std::complex<double> series = kLanczos[0];
  for (int k = 1; k < 9; ++k) {
    series += kLanczos[k] / (z + static_cast<double>(k));
  }
  const std::complex<double> t = z + 7.5;
  return std::sqrt(2.0 * pi) * std::pow(t, z + 0.5) * std::exp(-t) * series;
}

}  // namespace gpelab
