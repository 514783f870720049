#pragma once

#include <span>
#include <utility>
#include <vector>

namespace gpelab::fitting {

/// Least-squares line y = slope * x + intercept with the root-mean-square
/// residual of the fit.
struct Line {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};

Line least_squares_line(std::span<const double> x, std::span<const double> y);

/// One fitted decay law. For the power law T = asym - a v^{-b} the pair is
/// (coefficient, exponent) = (a, b); for the exponential B = d e^{-f v} it
/// is (d, f). residual is the RMS misfit of the linearized regression.
struct FitResult {
  double coefficient = 0.0;
  double exponent = 0.0;
  double residual = 0.0;
  std::vector<std::pair<double, double>> points_used;
};

/// Fits the transmitted-mass deficit 1/(1+alpha^2) - T(v) = a v^{-b} by
/// ordinary least squares on (log v, log deficit). Requires at least three
/// points, v > 0, and every deficit positive (offending velocities are
/// listed in the error message).
FitResult fit_power_law(std::span<const std::pair<double, double>> points,
                        double alpha);

/// Fits trapped mass B(v) = d e^{-f v} by least squares on (v, log B).
/// Values at or below the measurable floor e^{-14} are rejected (offending
/// velocities listed); at least three points are required. Callers fitting
/// sweep output drop below-floor points before calling.
FitResult fit_exponential(std::span<const std::pair<double, double>> points);

}  // namespace gpelab::fitting
