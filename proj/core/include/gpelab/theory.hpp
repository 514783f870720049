#pragma once

#include <complex>
#include <optional>

namespace gpelab::theory {

using cplx = std::complex<double>;

/// Physical parameters of a soliton-impurity run.
///
/// The incoming wave is u(x,0) = A sech(A(x-x0)) e^{i(v x + phase)}; the
/// impurity is a point potential of strength q at the origin. Closed-form
/// predictions below are stated for the unit-amplitude normalization A = 1
/// (see rescale_to_unit_amplitude).
struct PhysParams {
  double q = 0.0;
  double v = 0.0;
  double x0 = 0.0;
  double amplitude = 1.0;
  double phase = 0.0;
};

/// Transmission/reflection coefficients of the point potential,
/// t(v) = iv/(iv - q), r(v) = q/(iv - q).
struct ScatteringCoefficients {
  cplx t;
  cplx r;
};

/// Predicted outgoing solitons: amplitudes A_T = max(2|t|-1, 0),
/// A_R = max(2|r|-1, 0) and their carrier phases; a phase is absent when
/// the corresponding amplitude vanishes (no outgoing soliton on that side).
struct SplitPrediction {
  double transmitted_amplitude = 0.0;
  double reflected_amplitude = 0.0;
  std::optional<double> transmitted_phase;
  std::optional<double> reflected_phase;
};

/// Scattering data of the linear problem associated with alpha*sech initial
/// data: transmission coefficient t(lambda), b(lambda) = i sin(pi alpha) /
/// cosh(pi lambda), and r = b t.
struct ZSCoefficients {
  cplx t;
  cplx b;
  cplx r;
};

/// Long-time endpoint of the free evolution of alpha*sech(x):
/// amplitude 2 alpha - 1 and center phase offset for alpha > 1/2,
/// amplitude 0 with no phase (pure decay) for alpha < 1/2.
struct ResolutionAsymptote {
  double amplitude = 0.0;
  std::optional<double> phase;
};

/// t(v), r(v) for the point potential. Requires v > 0. Satisfies
/// |t|^2 + |r|^2 = 1 and t = 1 + r identically.
ScatteringCoefficients delta_scattering(double q, double v);

/// Plane-wave transmission rate |t(v)|^2 = v^2 / (v^2 + q^2). Requires v > 0.
double quantum_transmission_rate(double q, double v);

/// Phase correction phi0(omega) = int_0^inf log(1 + sin^2(pi omega) /
/// cosh^2(pi zeta)) * zeta / (zeta^2 + (2 omega - 1)^2) dzeta for
/// omega in (1/2, 1]. Absolute accuracy 1e-8; phi0(1) = 0; diverges as
/// omega -> 1/2+. Rejects omega outside (1/2, 1].
double phi0(double omega);

/// Outgoing soliton amplitudes and phases for unit-amplitude initial data.
/// phi_T = arg t + phi0(|t|) + (1 - A_T^2)|x0|/(2v) (+ initial phase),
/// and the mirror formula with r for the reflected side.
/// Requires v > 0 and params.amplitude == 1.
SplitPrediction split_prediction(const PhysParams& params);

/// Velocity below which no transmitted soliton forms: |q|/sqrt(3).
double transmitted_threshold_velocity(double q);

/// Velocity above which no reflected soliton forms: sqrt(3)|q|.
double reflected_threshold_velocity(double q);

/// Exact traveling soliton of the unperturbed equation:
/// A sech(A(x - x0 - v t)) e^{i(phase + v x + (A^2 - v^2) t / 2)}.
/// Requires amplitude > 0.
cplx soliton_exact(const PhysParams& params, double x, double t);

/// Normalized eigenstate sqrt(2|q|) e^{q|x|} of the attractive point
/// potential (q < 0); its squared L2 norm is 2. Rejects q >= 0.
double linear_bound_state(double q, double x);

/// Standing wave pinned at the impurity, q < 0, lambda > |q|:
/// e^{i lambda^2 t / 2} lambda sech(lambda |x| + atanh(|q|/lambda)).
/// Mass is 2(lambda - |q|). Rejects q >= 0 or lambda <= |q|.
cplx nonlinear_bound_state(double q, double lambda, double x, double t);

/// Scattering data for alpha*sech: t(lambda) = Gamma(1/2 + alpha - i lambda)
/// Gamma(1/2 - alpha - i lambda) / Gamma(1/2 - i lambda)^2, b, r = b t.
/// Requires alpha in (0, 1); rejects lambda within 1e-8 of a pole of t.
ZSCoefficients zs_coefficients(double alpha, cplx lambda);

/// Asymptote of the free evolution of alpha*sech(x). Requires alpha in
/// (0, 1) with alpha != 1/2 (the critical case has no clean asymptote).
ResolutionAsymptote free_resolution_asymptote(double alpha);

/// Equivalent unit-amplitude problem: amplitude-A data against coupling q
/// maps to amplitude-1 data against coupling q/A with velocity v/A and
/// center A*x0 (space/time rescaling x -> Ax, t -> A^2 t).
PhysParams rescale_to_unit_amplitude(const PhysParams& params);

}  // namespace gpelab::theory
