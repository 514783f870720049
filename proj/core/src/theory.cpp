#include "gpelab/theory.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "gpelab/errors.hpp"
#include "gpelab/quadrature.hpp"
#include "gpelab/special.hpp"

namespace gpelab::theory {
namespace {

using std::numbers::pi;

void require_positive_velocity(double v) {
  if (!(v > 0.0)) {
    throw std::invalid_argument("velocity must be positive, got " +
                                std::to_string(v));
  }
}

// Distance from w to the nearest nonpositive integer, where the Gamma
// function has its poles.
bool near_gamma_pole(cplx w, double tol) {
  const double n = std::round(w.real());
  if (n > 0.5) return false;
  return std::abs(w - cplx(n, 0.0)) < tol;
}

}  // namespace

ScatteringCoefficients delta_scattering(double q, double v) {
  require_positive_velocity(v);
  const cplx iv(0.0, v);
  const cplx denom = iv - q;
  return {iv / denom, q / denom};
}

double quantum_transmission_rate(double q, double v) {
  require_positive_velocity(v);
  return v * v / (v * v + q * q);
}

double phi0(double omega) {
  if (!(omega > 0.5) || !(omega <= 1.0)) {
    throw std::invalid_argument("phi0 domain is (1/2, 1], got " +
                                std::to_string(omega));
  }
  if (omega == 1.0) return 0.0;  // sin(pi omega) kills the integrand
  const double s2 = std::pow(std::sin(pi * omega), 2);
  const double d2 = std::pow(2.0 * omega - 1.0, 2);
  const auto integrand = [s2, d2](double zeta) {
    const double c = std::cosh(pi * zeta);
    return std::log1p(s2 / (c * c)) * zeta / (zeta * zeta + d2);
  };
  // The integrand decays like e^{-2 pi zeta}: the tail beyond zeta = 10 is
  // below 1e-27 and is dropped.
  return integrate(integrand, 0.0, 10.0, 1e-9);
}

SplitPrediction split_prediction(const PhysParams& params) {
  require_positive_velocity(params.v);
  if (params.amplitude != 1.0) {
    throw std::invalid_argument(
        "split_prediction is stated for unit amplitude; use "
        "rescale_to_unit_amplitude first");
  }
  if (!(params.x0 < 0.0)) {
    throw std::invalid_argument("scattering setup needs x0 < 0, got " +
                                std::to_string(params.x0));
  }
  const auto sc = delta_scattering(params.q, params.v);
  const double drift_scale = std::abs(params.x0) / (2.0 * params.v);
  SplitPrediction out;
  out.transmitted_amplitude = std::max(2.0 * std::abs(sc.t) - 1.0, 0.0);
  out.reflected_amplitude = std::max(2.0 * std::abs(sc.r) - 1.0, 0.0);
  if (out.transmitted_amplitude > 0.0) {
    const double a2 = out.transmitted_amplitude * out.transmitted_amplitude;
    out.transmitted_phase = std::arg(sc.t) + phi0(std::abs(sc.t)) +
                            (1.0 - a2) * drift_scale + params.phase;
  }
  if (out.reflected_amplitude > 0.0) {
    const double a2 = out.reflected_amplitude * out.reflected_amplitude;
    out.reflected_phase = std::arg(sc.r) + phi0(std::abs(sc.r)) +
                          (1.0 - a2) * drift_scale + params.phase;
  }
  return out;
}

double transmitted_threshold_velocity(double q) {
  return std::abs(q) / std::sqrt(3.0);
}

double reflected_threshold_velocity(double q) {
  return std::sqrt(3.0) * std::abs(q);
}

cplx soliton_exact(const PhysParams& params, double x, double t) {
  if (!(params.amplitude > 0.0)) {
    throw std::invalid_argument("soliton amplitude must be positive");
  }
  const double A = params.amplitude;
  const double v = params.v;
  const double arg_sech = A * (x - params.x0 - v * t);
  const double envelope = A / std::cosh(arg_sech);
  const double phase = params.phase + v * x + 0.5 * (A * A - v * v) * t;
  return std::polar(envelope, phase);
}

double linear_bound_state(double q, double x) {
  if (!(q < 0.0)) {
    throw std::invalid_argument("linear bound state needs q < 0, got " +
                                std::to_string(q));
  }
  return std::sqrt(-2.0 * q) * std::exp(q * std::abs(x));
}

cplx nonlinear_bound_state(double q, double lambda, double x, double t) {
  if (!(q < 0.0)) {
    throw std::invalid_argument("nonlinear bound state needs q < 0, got " +
                                std::to_string(q));
  }
  if (!(lambda > -q)) {
    throw std::invalid_argument("nonlinear bound state needs lambda > |q|");
  }
  const double shift = std::atanh(-q / lambda);
  const double envelope = lambda / std::cosh(lambda * std::abs(x) + shift);
  return std::polar(envelope, 0.5 * lambda * lambda * t);
}

ZSCoefficients zs_coefficients(double alpha, cplx lambda) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw std::invalid_argument("zs_coefficients needs alpha in (0,1), got " +
                                std::to_string(alpha));
  }
  const cplx w1 = cplx(0.5 + alpha, 0.0) - cplx(0.0, 1.0) * lambda;
  const cplx w2 = cplx(0.5 - alpha, 0.0) - cplx(0.0, 1.0) * lambda;
  const cplx w0 = cplx(0.5, 0.0) - cplx(0.0, 1.0) * lambda;
  if (near_gamma_pole(w1, 1e-8) || near_gamma_pole(w2, 1e-8)) {
    throw NumericalError("zs_coefficients: lambda within 1e-8 of a pole of t");
  }
  ZSCoefficients out;
  const cplx g0 = complex_gamma(w0);
  out.t = complex_gamma(w1) * complex_gamma(w2) / (g0 * g0);
  out.b = cplx(0.0, 1.0) * std::sin(pi * alpha) / std::cosh(pi * lambda);
  out.r = out.b * out.t;
  return out;
}

ResolutionAsymptote free_resolution_asymptote(double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw std::invalid_argument(
        "free_resolution_asymptote needs alpha in (0,1), got " +
        std::to_string(alpha));
  }
  if (std::abs(alpha - 0.5) < 1e-12) {
    throw std::invalid_argument(
        "free_resolution_asymptote is undefined at the alpha = 1/2 threshold");
  }
  ResolutionAsymptote out;
  if (alpha > 0.5) {
    out.amplitude = 2.0 * alpha - 1.0;
    out.phase = phi0(alpha);
  }
  return out;
}

PhysParams rescale_to_unit_amplitude(const PhysParams& params) {
  if (!(params.amplitude > 0.0)) {
    throw std::invalid_argument("amplitude must be positive");
  }
  const double A = params.amplitude;
  PhysParams out = params;
  out.amplitude = 1.0;
  out.v = params.v / A;
  out.q = params.q / A;
  out.x0 = params.x0 * A;
  return out;
}

}  // namespace gpelab::theory
