#include "gpelab/stepper.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gpelab/assembly.hpp"
#include "gpelab/errors.hpp"

namespace gpelab::stepper {
namespace {

void nodal_cubic(const std::vector<cplx>& y, const fem::RealTridiagonal& mass,
                 std::vector<cplx>& scratch, std::vector<cplx>& out) {
  scratch.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    scratch[i] = std::norm(y[i]) * y[i];
  }
  out.resize(y.size());
  fem::matvec(mass, scratch, out);
}

// Exact element integrals of |y|^2 y against the hat basis, with y the
// piecewise-linear interpolant y(s) = a + d s on each element (d = b - a).
// |y|^2 y = m0 + m1 s + m2 s^2 + m3 s^3 with the coefficients below;
// integrating against (1-s) and s gives the two endpoint loads.
void exact_cubic(const fem::Mesh1D& mesh, const std::vector<cplx>& y,
                 std::vector<cplx>& out) {
  out.assign(y.size(), 0.0);
  for (std::size_t e = 0; e + 1 < y.size(); ++e) {
    const double h = mesh.spacing(e);
    const cplx a = y[e];
    const cplx d = y[e + 1] - a;
    const cplx m0 = std::norm(a) * a;
    const cplx m1 = a * a * std::conj(d) + 2.0 * std::norm(a) * d;
    const cplx m2 = 2.0 * a * std::norm(d) + d * d * std::conj(a);
    const cplx m3 = std::norm(d) * d;
    out[e] += h * (m0 / 2.0 + m1 / 6.0 + m2 / 12.0 + m3 / 20.0);
    out[e + 1] += h * (m0 / 2.0 + m1 / 3.0 + m2 / 4.0 + m3 / 5.0);
  }
}

}  // namespace

std::vector<cplx> thomas_solve(const fem::ComplexTridiagonal& A,
                               std::span<const cplx> rhs) {
  const std::size_t n = A.size();
  if (rhs.size() != n) {
    throw std::invalid_argument("thomas_solve: size mismatch");
  }
  std::vector<cplx> super(n), x(n);
  cplx pivot = A.diag[0];
  if (std::abs(pivot) == 0.0) throw NumericalError("thomas_solve: zero pivot");
  super[0] = A.super[0] / pivot;
  x[0] = rhs[0] / pivot;
  for (std::size_t i = 1; i < n; ++i) {
    pivot = A.diag[i] - A.sub[i] * super[i - 1];
    if (std::abs(pivot) == 0.0) {
      throw NumericalError("thomas_solve: zero pivot at row " +
                           std::to_string(i));
    }
    super[i] = A.super[i] / pivot;
    x[i] = (rhs[i] - A.sub[i] * x[i - 1]) / pivot;
  }
  for (std::size_t i = n - 1; i-- > 0;) {
    x[i] -= super[i] * x[i + 1];
  }
  return x;
}

std::vector<cplx> cubic_load(const ComplexField& y,
                             const fem::RealTridiagonal& mass, CubicRule rule) {
  std::vector<cplx> out;
  if (rule == CubicRule::nodal) {
    std::vector<cplx> scratch;
    nodal_cubic(y.values, mass, scratch, out);
  } else {
    exact_cubic(*y.mesh, y.values, out);
  }
  return out;
}

Stepper::Stepper(std::shared_ptr<const fem::Mesh1D> mesh, StepConfig config)
    : mesh_(std::move(mesh)), config_(config) {
  if (!(config_.dt > 0.0)) {
    throw std::invalid_argument("dt must be positive");
  }
  if (config_.iterations < 1) {
    throw std::invalid_argument("at least one fixed-point sweep is required");
  }
  mass_ = fem::assemble_mass(*mesh_);
  stiffness_ = fem::assemble_stiffness(*mesh_);

  // L = M + i dt/4 K + i dt q/2 D with identity rows at the ends; solving
  // L y = rhs with rhs[end] = u_n[end] freezes the boundary values.
  const std::size_t n = mesh_->size();
  const double kt = 0.25 * config_.dt;
  fem::ComplexTridiagonal L(n);
  for (std::size_t i = 0; i < n; ++i) {
    L.diag[i] = cplx(mass_.diag[i], kt * stiffness_.diag[i]);
    L.sub[i] = cplx(mass_.sub[i], kt * stiffness_.sub[i]);
    L.super[i] = cplx(mass_.super[i], kt * stiffness_.super[i]);
  }
  L.diag[mesh_->origin_index()] += cplx(0.0, 0.5 * config_.dt * config_.q);
  L.diag[0] = 1.0;
  L.super[0] = 0.0;
  L.diag[n - 1] = 1.0;
  L.sub[n - 1] = 0.0;

  factor_sub_.assign(L.sub.begin(), L.sub.end());
  factor_super_.resize(n);
  factor_inv_diag_.resize(n);
  cplx pivot = L.diag[0];
  factor_inv_diag_[0] = 1.0 / pivot;
  factor_super_[0] = L.super[0] * factor_inv_diag_[0];
  for (std::size_t i = 1; i < n; ++i) {
    pivot = L.diag[i] - L.sub[i] * factor_super_[i - 1];
    if (std::abs(pivot) < 1e-300) {
      throw NumericalError("step operator factorization hit a zero pivot "
                           "(dt/h pathology)");
    }
    factor_inv_diag_[i] = 1.0 / pivot;
    factor_super_[i] = L.super[i] * factor_inv_diag_[i];
  }

  rhs_base_.resize(n);
  rhs_.resize(n);
  y_.resize(n);
  y_next_.resize(n);
  cubic_.resize(n);
}

void Stepper::step_in_place(std::vector<cplx>& u) {
  const std::size_t n = u.size();
  const std::size_t last = n - 1;
  fem::matvec(mass_, u, rhs_base_);
  rhs_base_[0] = u[0];
  rhs_base_[last] = u[last];
  y_ = u;
  const cplx load_scale(0.0, 0.5 * config_.dt);
  const int sweeps = config_.nonlinear ? config_.iterations : 1;
  for (int k = 0; k < sweeps; ++k) {
    if (config_.nonlinear) {
      if (config_.cubic_rule == CubicRule::nodal) {
        nodal_cubic(y_, mass_, y_next_, cubic_);
      } else {
        exact_cubic(*mesh_, y_, cubic_);
      }
      rhs_[0] = rhs_base_[0];
      rhs_[last] = rhs_base_[last];
      for (std::size_t i = 1; i < last; ++i) {
        rhs_[i] = rhs_base_[i] + load_scale * cubic_[i];
      }
    } else {
      rhs_ = rhs_base_;
    }

    y_next_[0] = rhs_[0] * factor_inv_diag_[0];
    for (std::size_t i = 1; i < n; ++i) {
      y_next_[i] =
          (rhs_[i] - factor_sub_[i] * y_next_[i - 1]) * factor_inv_diag_[i];
    }
    for (std::size_t i = n - 1; i-- > 0;) {
      y_next_[i] -= factor_super_[i] * y_next_[i + 1];
    }

    if (config_.residual_stop && config_.nonlinear) {
      double delta = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        delta = std::max(delta, std::abs(y_next_[i] - y_[i]));
      }
      y_.swap(y_next_);
      if (delta <= 1e-12) break;
    } else {
      y_.swap(y_next_);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = 2.0 * y_[i] - u[i];
  }
}

ComplexField Stepper::step(const ComplexField& u) {
  if (u.values.size() != mesh_->size()) {
    throw std::invalid_argument("field does not match the stepper's mesh");
  }
  ComplexField out = u;
  step_in_place(out.values);
  return out;
}

Trajectory Stepper::evolve(const ComplexField& u0, double t_final,
                           const EvolveOptions& options) {
  if (!(t_final > 0.0)) {
    throw std::invalid_argument("t_final must be positive");
  }
  if (u0.values.size() != mesh_->size()) {
    throw std::invalid_argument("field does not match the stepper's mesh");
  }
  const long n_steps =
      std::max<long>(1, std::lround(t_final / config_.dt));
  const int stride = std::max(1, options.sample_stride);

  ComplexField u;
  u.mesh = mesh_;
  u.values = u0.values;

  Trajectory traj;
  traj.series_names.reserve(options.observers.size());
  traj.series.resize(options.observers.size());
  for (const auto& [name, fn] : options.observers) {
    traj.series_names.push_back(name);
  }

  const double mass0 = fem::discrete_mass(u, mass_);
  const std::size_t origin = mesh_->origin_index();

  const auto sample = [&](double t) {
    const double m = fem::discrete_mass(u, mass_);
    if (mass0 > 0.0 &&
        std::abs(m - mass0) > config_.mass_drift_tol * mass0) {
      throw NumericalError(
          "mass drift " + std::to_string(std::abs(m - mass0) / mass0) +
          " exceeded " + std::to_string(config_.mass_drift_tol) + " at t=" +
          std::to_string(t) + " (resolution failure)");
    }
    traj.times.push_back(t);
    traj.mass.push_back(m);
    traj.center.push_back(u.values[origin]);
    for (std::size_t j = 0; j < options.observers.size(); ++j) {
      traj.series[j].push_back(options.observers[j].second(t, u));
    }
  };
  const auto snapshot = [&](double t) {
    traj.snapshot_times.push_back(t);
    traj.snapshots.push_back(u);
  };

  sample(0.0);
  double next_snapshot = 0.0;
  if (options.snapshot_interval > 0.0) {
    snapshot(0.0);
    next_snapshot = options.snapshot_interval;
  }

  for (long k = 1; k <= n_steps; ++k) {
    step_in_place(u.values);
    const double t = static_cast<double>(k) * config_.dt;
    if (k % stride == 0 || k == n_steps) sample(t);
    if (options.snapshot_interval > 0.0 &&
        t + 0.5 * config_.dt >= next_snapshot) {
      snapshot(t);
      next_snapshot += options.snapshot_interval;
    }
  }
  traj.final_state = std::move(u);
  return traj;
}

}  // namespace gpelab::stepper
