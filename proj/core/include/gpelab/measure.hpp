#pragma once

#include <optional>
#include <span>
#include <vector>

#include "gpelab/field.hpp"
#include "gpelab/stepper.hpp"
#include "gpelab/theory.hpp"

namespace gpelab::measure {

using fem::cplx;
using fem::ComplexField;

/// Halved region masses at one instant: transmitted = 1/2 int_{1/2}^{R},
/// reflected = 1/2 int_{-R}^{-1/2}, trapped = 1/2 int_{-1/2}^{1/2} of |u|^2.
/// For unit-amplitude initial data (mass 2) the three add up to 1.
struct MassPartition {
  double time = 0.0;
  double transmitted = 0.0;
  double reflected = 0.0;
  double trapped = 0.0;
};

enum class Side { transmitted, reflected };

/// Outcome of resolving one outgoing piece under the free flow.
struct ResolutionResult {
  Side side = Side::transmitted;
  double measured_amplitude = 0.0;
  double window_begin = 0.0;   // averaging window actually used
  double window_end = 0.0;
  bool stabilized = false;     // 1% running-mean spread criterion met
  std::vector<double> times;   // sampled sup_x |u| series
  std::vector<double> sup_abs;
};

/// Integral of |u_h|^2 over [a, b] with the quadrature induced by the hat
/// basis (consistent with the mass matrix). Both endpoints must coincide
/// with mesh nodes.
double mass_in_region(const ComplexField& u, double a, double b);

/// Region masses with the +-1/2 cutoffs; partition additivity against
/// discrete_mass holds to rounding.
MassPartition mass_partition(const ComplexField& u, double time = 0.0);

/// Trailing-window mean of a sampled series if its fluctuation has settled:
/// returns the mean over [t_end - window, t_end] when (max - min) in that
/// window is <= tol * max(|mean|, 1e-9), otherwise nullopt. Requires the
/// series to span at least two windows.
std::optional<double> stabilized_limit(std::span<const double> times,
                                       std::span<const double> values,
                                       double window, double tol);

/// Plain trailing-window mean (no stabilization requirement).
double window_mean(std::span<const double> times, std::span<const double> values,
                   double window);

/// Discrete L2 distance between u and the two-soliton comparison profile
///   e^{i t (1 - v^2)/2} [ t_q e^{i v x} sech(x - x0 - v t)
///                       + r_q e^{-i v x} sech(x + x0 + v t) ].
/// Requires params.amplitude == 1 and params.v > 0.
double profile_distance(const ComplexField& u, const theory::PhysParams& params,
                        double t);

/// Restricts u to one side of the origin, removes the carrier (e^{-ivx} on
/// the transmitted side, e^{+ivx} on the reflected side), shifts the mass
/// centroid to 0 and resamples onto a fresh uniform mesh of half-width R_big
/// with n_big elements, zero elsewhere. The result is rescaled so its mass
/// equals the mass of the truncated piece exactly (the resampling alone is
/// O(h^2) mass-preserving). Rejects sides carrying less than 1e-6 of the
/// total mass.
ComplexField truncate_reembed(const ComplexField& u, Side side, double v,
                              double R_big, int n_big);

/// Evolves a re-embedded piece under the free flow (config.q must be 0,
/// nonlinear mode) and time-averages sup_x |u| over a trailing window
/// (50 amplitude-oscillation periods, capped at 45% of the span). The
/// stabilized flag reports whether block means within the window agree to
/// 1%. Signals boundary contamination if mass within 1 unit of the ends
/// exceeds 1e-6.
ResolutionResult resolve_amplitude(const ComplexField& piece, Side side,
                                   double t_max, const stepper::StepConfig& config);

/// Max over sampled times of the L2 distance between the evolutions of u
/// under the given config and under the same config with q = 0.
double nls_q_vs_nls_0_deviation(const ComplexField& u, double t_span,
                                const stepper::StepConfig& config);

/// Deviation of the center phase from the resolved-soliton rotation:
/// dev(t) = [unwrapped arg u(0,t) - arg u(0,t_first)] - (2 alpha - 1)^2 (t - t_first)/2.
/// Unwrapping is nearest-branch with a pi/2 step guard; requires alpha > 1/2
/// and |u(0,t)| >= 1e-8 at every sample.
std::vector<double> center_phase_deviation(const stepper::Trajectory& trajectory,
                                           double alpha);

/// Discrete momentum Im int conj(u) u_x (trapezoid on element midpoints).
double momentum(const ComplexField& u);

/// Max of |u| over the nodes.
double sup_abs(const ComplexField& u);

}  // namespace gpelab::measure
