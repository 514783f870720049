#include "gpelab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "gpelab/errors.hpp"

namespace gpelab::measure {
namespace {

using std::numbers::pi;

// Element contribution of |a (1-s) + b s|^2, times h/3 totals the exact
// integral of the squared linear interpolant.
double element_mass(double h, cplx a, cplx b) {
  return h * (std::norm(a) + (std::conj(a) * b).real() + std::norm(b)) / 3.0;
}

double field_l2(const ComplexField& u) {
  double sum = 0.0;
  for (std::size_t e = 0; e + 1 < u.values.size(); ++e) {
    sum += element_mass(u.mesh->spacing(e), u.values[e], u.values[e + 1]);
  }
  return std::sqrt(std::max(sum, 0.0));
}

std::size_t window_start(std::span<const double> times, double window) {
  const double cutoff = times.back() - window;
  std::size_t i = times.size();
  while (i > 0 && times[i - 1] >= cutoff) --i;
  return i;
}

double mean_over(std::span<const double> values, std::size_t begin,
                 std::size_t end) {
  double sum = 0.0;
  for (std::size_t i = begin; i < end; ++i) sum += values[i];
  return sum / static_cast<double>(end - begin);
}

}  // namespace

double mass_in_region(const ComplexField& u, double a, double b) {
  if (!(a < b)) throw std::invalid_argument("mass_in_region needs a < b");
  const std::size_t ia = u.mesh->index_of(a);
  const std::size_t ib = u.mesh->index_of(b);
  double sum = 0.0;
  for (std::size_t e = ia; e < ib; ++e) {
    sum += element_mass(u.mesh->spacing(e), u.values[e], u.values[e + 1]);
  }
  return sum;
}

MassPartition mass_partition(const ComplexField& u, double time) {
  const double R = u.mesh->extent();
  MassPartition p;
  p.time = time;
  p.transmitted = 0.5 * mass_in_region(u, 0.5, R);
  p.reflected = 0.5 * mass_in_region(u, -R, -0.5);
  p.trapped = 0.5 * mass_in_region(u, -0.5, 0.5);
  return p;
}

std::optional<double> stabilized_limit(std::span<const double> times,
                                       std::span<const double> values,
                                       double window, double tol) {
  if (times.size() != values.size() || times.empty()) {
    throw std::invalid_argument("stabilized_limit: bad series");
  }
  if (!(window > 0.0)) {
    throw std::invalid_argument("stabilized_limit: window must be positive");
  }
  if (times.back() - times.front() < 2.0 * window) return std::nullopt;
  const std::size_t begin = window_start(times, window);
  const double mean = mean_over(values, begin, values.size());
  double lo = values[begin];
  double hi = values[begin];
  for (std::size_t i = begin; i < values.size(); ++i) {
    lo = std::min(lo, values[i]);
    hi = std::max(hi, values[i]);
  }
  if (hi - lo <= tol * std::max(std::abs(mean), 1e-9)) return mean;
  return std::nullopt;
}

double window_mean(std::span<const double> times,
                   std::span<const double> values, double window) {
  if (times.size() != values.size() || times.empty()) {
    throw std::invalid_argument("window_mean: bad series");
  }
  return mean_over(values, window_start(times, window), values.size());
}

double profile_distance(const ComplexField& u,
                        const theory::PhysParams& params, double t) {
  if (params.amplitude != 1.0) {
    throw std::invalid_argument("profile is stated for unit amplitude");
  }
  const auto sc = theory::delta_scattering(params.q, params.v);
  const double v = params.v;
  const cplx rot = std::polar(1.0, 0.5 * t * (1.0 - v * v));
  ComplexField diff;
  diff.mesh = u.mesh;
  diff.values.resize(u.values.size());
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    const double x = u.mesh->node(i);
    const cplx fwd = std::polar(1.0, v * x) / std::cosh(x - params.x0 - v * t);
    const cplx bwd = std::polar(1.0, -v * x) / std::cosh(x + params.x0 + v * t);
    diff.values[i] = u.values[i] - rot * (sc.t * fwd + sc.r * bwd);
  }
  return field_l2(diff);
}

ComplexField truncate_reembed(const ComplexField& u, Side side, double v,
                              double R_big, int n_big) {
  if (!(v > 0.0)) throw std::invalid_argument("carrier removal needs v > 0");
  if (!(R_big > 1.0) || n_big < 8) {
    throw std::invalid_argument("re-embedding grid is too small");
  }

  // Truncate to one side of the origin and strip the carrier; the modulus
  // is untouched, so region masses are preserved.
  ComplexField piece;
  piece.mesh = u.mesh;
  piece.values.assign(u.values.size(), 0.0);
  const double carrier = side == Side::transmitted ? -v : v;
  double total = 0.0;
  for (std::size_t e = 0; e + 1 < u.values.size(); ++e) {
    total += element_mass(u.mesh->spacing(e), u.values[e], u.values[e + 1]);
  }
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    const double x = u.mesh->node(i);
    const bool keep = side == Side::transmitted ? x >= 0.0 : x <= 0.0;
    if (keep) {
      piece.values[i] = u.values[i] * std::polar(1.0, carrier * x);
    }
  }

  double mass_before = 0.0;
  double moment = 0.0;
  for (std::size_t e = 0; e + 1 < piece.values.size(); ++e) {
    const double h = piece.mesh->spacing(e);
    const cplx a = piece.values[e];
    const cplx b = piece.values[e + 1];
    const double m = element_mass(h, a, b);
    mass_before += m;
    moment += piece.mesh->node(e) * m +
              h * h *
                  (std::norm(a) / 12.0 + (std::conj(a) * b).real() / 6.0 +
                   std::norm(b) / 4.0);
  }
  if (mass_before < 1e-6 * total) {
    throw NumericalError("side carries less than 1e-6 of the total mass");
  }
  const double centroid = moment / mass_before;

  const double h_big = 2.0 * R_big / n_big;
  const int inner = std::max(2, static_cast<int>(std::lround(0.5 / h_big)));
  const int outer = std::max(
      2, static_cast<int>(std::lround((R_big - 0.5) / h_big)));
  ComplexField out;
  out.mesh = fem::Mesh1D::build(R_big, outer, inner);
  out.values.reserve(out.mesh->size());
  for (double x : out.mesh->nodes()) {
    out.values.push_back(interpolate(piece, x + centroid));
  }

  // The P1 resample conserves mass only to O(h^2); rescale so the embed is
  // an exact isometry.
  double mass_after = 0.0;
  for (std::size_t e = 0; e + 1 < out.values.size(); ++e) {
    mass_after += element_mass(out.mesh->spacing(e), out.values[e],
                               out.values[e + 1]);
  }
  if (!(mass_after > 0.0)) {
    throw NumericalError("re-embedded piece lost all mass");
  }
  const double scale = std::sqrt(mass_before / mass_after);
  for (cplx& value : out.values) value *= scale;
  return out;
}

ResolutionResult resolve_amplitude(const ComplexField& piece, Side side,
                                   double t_max,
                                   const stepper::StepConfig& config) {
  if (config.q != 0.0) {
    throw std::invalid_argument("resolution runs under the free flow (q=0)");
  }
  if (!config.nonlinear) {
    throw std::invalid_argument("resolution needs the nonlinear flow");
  }
  const fem::Mesh1D& mesh = *piece.mesh;
  const double left_edge = mesh.node(mesh.lower_index(mesh.nodes().front() + 1.0));
  const double right_edge = mesh.node(mesh.lower_index(mesh.nodes().back() - 1.0));

  stepper::EvolveOptions options;
  options.sample_stride =
      std::max(1, static_cast<int>(std::lround(0.05 / config.dt)));
  options.observers.emplace_back(
      "sup", [](double, const ComplexField& u) { return sup_abs(u); });
  options.observers.emplace_back(
      "edge", [&](double, const ComplexField& u) {
        return mass_in_region(u, u.mesh->nodes().front(), left_edge) +
               mass_in_region(u, right_edge, u.mesh->nodes().back());
      });

  stepper::Stepper engine(piece.mesh, config);
  stepper::Trajectory traj = engine.evolve(piece, t_max, options);

  const std::vector<double>& times = traj.times;
  const std::vector<double>& sup = traj.series[0];
  const std::vector<double>& edge = traj.series[1];
  const double max_edge = *std::max_element(edge.begin(), edge.end());
  if (max_edge > 1e-6) {
    throw NumericalError("boundary contamination: mass " +
                         std::to_string(max_edge) +
                         " within 1 unit of the grid ends");
  }

  const double span = times.back() - times.front();
  const double tail_estimate = window_mean(times, sup, 0.1 * span);
  double window = 0.45 * span;
  if (tail_estimate > 1e-3) {
    // 50 beat periods of the soliton-radiation oscillation, 4 pi / A^2 each.
    window = std::min(window, 50.0 * 4.0 * pi /
                                  (tail_estimate * tail_estimate));
  }

  ResolutionResult result;
  result.side = side;
  result.window_begin = times.back() - window;
  result.window_end = times.back();
  const std::size_t begin = window_start(times, window);
  result.measured_amplitude = mean_over(sup, begin, sup.size());

  // Stabilization: running means over a fifth of the window, evaluated
  // across the window, must agree to 1%.
  const double sub_window = window / 5.0;
  double lo = 0.0;
  double hi = 0.0;
  bool first = true;
  for (std::size_t i = begin; i < times.size(); ++i) {
    if (times[i] - times[begin] < sub_window) continue;
    std::size_t j = i;
    while (j > 0 && times[j - 1] >= times[i] - sub_window) --j;
    const double running = mean_over(sup, j, i + 1);
    lo = first ? running : std::min(lo, running);
    hi = first ? running : std::max(hi, running);
    first = false;
  }
  result.stabilized =
      !first &&
      hi - lo <= 0.01 * std::max(std::abs(result.measured_amplitude), 1e-9);
  result.times = times;
  result.sup_abs = sup;
  return result;
}

double nls_q_vs_nls_0_deviation(const ComplexField& u, double t_span,
                                const stepper::StepConfig& config) {
  stepper::StepConfig free_config = config;
  free_config.q = 0.0;
  stepper::Stepper perturbed(u.mesh, config);
  stepper::Stepper free_flow(u.mesh, free_config);

  ComplexField a = u;
  ComplexField b = u;
  ComplexField diff;
  diff.mesh = u.mesh;
  diff.values.resize(u.values.size());
  const long n_steps =
      std::max<long>(1, std::lround(t_span / config.dt));
  double worst = 0.0;
  for (long k = 0; k < n_steps; ++k) {
    a = perturbed.step(a);
    b = free_flow.step(b);
    for (std::size_t i = 0; i < diff.values.size(); ++i) {
      diff.values[i] = a.values[i] - b.values[i];
    }
    worst = std::max(worst, field_l2(diff));
  }
  return worst;
}

std::vector<double> center_phase_deviation(
    const stepper::Trajectory& trajectory, double alpha) {
  if (!(alpha > 0.5)) {
    throw std::invalid_argument(
        "phase comparison needs alpha > 1/2 (a surviving soliton)");
  }
  const auto& times = trajectory.times;
  const auto& center = trajectory.center;
  if (times.empty() || times.size() != center.size()) {
    throw std::invalid_argument("trajectory has no center series");
  }
  const double rate = 0.5 * std::pow(2.0 * alpha - 1.0, 2);
  std::vector<double> deviation;
  deviation.reserve(times.size());
  double unwrapped = 0.0;
  double prev_raw = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (std::abs(center[k]) < 1e-8) {
      throw NumericalError("center amplitude below 1e-8 at t=" +
                           std::to_string(times[k]) + "; phase undefined");
    }
    const double raw = std::arg(center[k]);
    if (k == 0) {
      unwrapped = raw;
    } else {
      const double step = std::remainder(raw - prev_raw, 2.0 * pi);
      if (std::abs(step) > 0.5 * pi) {
        throw NumericalError("phase unwrap step " + std::to_string(step) +
                             " at t=" + std::to_string(times[k]) +
                             "; sampling too coarse");
      }
      unwrapped += step;
    }
    prev_raw = raw;
    deviation.push_back(unwrapped - std::arg(center[0]) -
                        rate * (times[k] - times[0]));
  }
  return deviation;
}

double momentum(const ComplexField& u) {
  double sum = 0.0;
  for (std::size_t e = 0; e + 1 < u.values.size(); ++e) {
    const cplx a = u.values[e];
    const cplx b = u.values[e + 1];
    sum += (std::conj(a + b) * (b - a)).imag() / 2.0;
  }
  return sum;
}

double sup_abs(const ComplexField& u) {
  double best = 0.0;
  for (const cplx& value : u.values) {
    best = std::max(best, std::abs(value));
  }
  return best;
}

}  // namespace gpelab::measure
