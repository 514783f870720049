#pragma once

#include <functional>

namespace gpelab {

/// Adaptive Gauss-Kronrod (G7,K15) integration of f over the finite
/// interval [a, b].
///
/// Intervals are bisected until each one's K15-G7 error estimate is below
/// its proportional share of abs_tol. Throws NumericalError if more than
/// max_intervals subdivisions are needed.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol, int max_intervals = 4000);

}  // namespace gpelab
