#pragma once

#include <complex>

namespace gpelab {

/// Gamma function of a complex argument.
///
/// Nine-term Lanczos coefficient table (g = 7) for Re z >= 1/2, reflection
/// formula Gamma(z)Gamma(1-z) = pi/sin(pi z) otherwise. Relative accuracy is
/// better than 1e-12 on the strip |Im z| <= 20. Poles (nonpositive integers)
/// return inf/nan; callers that care must guard.
std::complex<double> complex_gamma(std::complex<double> z);

}  // namespace gpelab
