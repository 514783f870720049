#pragma once

#include <stdexcept>

namespace gpelab {

/// Runtime breakdown of a numerical procedure (zero pivot, mass drift,
/// boundary contamination, failed unwrap, non-converged quadrature).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gpelab
