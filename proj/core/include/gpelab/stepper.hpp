#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gpelab/field.hpp"

namespace gpelab::stepper {

using fem::cplx;
using fem::ComplexField;
using fem::Mesh1D;

/// Quadrature rule for the cubic term. The nodal rule applies the mass
/// matrix to the nodal values of |y|^2 y; the exact rule integrates the
/// cubic of the piecewise-linear interpolant element by element.
enum class CubicRule { nodal, exact };

struct StepConfig {
  double dt = 1e-3;
  double q = 0.0;
  int iterations = 3;           // fixed-point sweeps per step
  bool nonlinear = true;
  CubicRule cubic_rule = CubicRule::nodal;
  bool residual_stop = false;   // stop sweeps once the update is < 1e-12
  double mass_drift_tol = 1e-4; // relative drift that aborts evolve()
};

/// Sampled history of a run. times/mass/center plus any observer columns
/// are filled at the sampling stride; snapshots are stored separately.
struct Trajectory {
  std::vector<double> times;
  std::vector<double> mass;
  std::vector<cplx> center;                    // u(0, t)
  std::vector<std::string> series_names;
  std::vector<std::vector<double>> series;     // one column per observer
  std::vector<double> snapshot_times;
  std::vector<ComplexField> snapshots;
  ComplexField final_state;
};

/// Scalar observer evaluated at every sample time.
using Observer = std::function<double(double t, const ComplexField& u)>;

struct EvolveOptions {
  int sample_stride = 10;          // steps between samples
  double snapshot_interval = 0.0;  // time between stored snapshots (0 = none)
  std::vector<std::pair<std::string, Observer>> observers;
};

/// Solves A y = rhs by the Thomas algorithm (no pivoting). Signals
/// NumericalError on a vanishing pivot. The matrices assembled by the
/// stepper are strictly diagonally dominant, so no pivoting is needed.
std::vector<cplx> thomas_solve(const fem::ComplexTridiagonal& A,
                               std::span<const cplx> rhs);

/// Load vector of the cubic term at state y under the given rule.
std::vector<cplx> cubic_load(const ComplexField& y,
                             const fem::RealTridiagonal& mass, CubicRule rule);

/// Midpoint time stepper for i u_t = -1/2 u_xx + q delta u - |u|^2 u on a
/// fixed mesh with homogeneous Dirichlet ends.
///
/// One step solves, for a configurable number of fixed-point sweeps,
///   (M + i dt/4 K + i dt q/2 D) y = i dt/2 N(y_prev) + M u_n,
/// starting from y = u_n, and sets u_{n+1} = 2 y - u_n. In linear mode the
/// cubic load N is dropped and a single solve is exact. Boundary values are
/// held fixed (zero for data supported away from the ends).
///
/// A Stepper instance owns scratch storage and must not be shared across
/// threads; parallelism happens across runs, one stepper per run.
class Stepper {
 public:
  Stepper(std::shared_ptr<const Mesh1D> mesh, StepConfig config);

  const StepConfig& config() const { return config_; }
  const fem::RealTridiagonal& mass_matrix() const { return mass_; }
  const fem::RealTridiagonal& stiffness_matrix() const { return stiffness_; }

  /// One time step.
  ComplexField step(const ComplexField& u);

  /// Runs n = round(t_final/dt) steps, sampling the built-in series and the
  /// observers. Aborts with NumericalError if the discrete mass drifts by
  /// more than config.mass_drift_tol relative to its initial value.
  Trajectory evolve(const ComplexField& u0, double t_final,
                    const EvolveOptions& options = {});

 private:
  void step_in_place(std::vector<cplx>& u);

  std::shared_ptr<const Mesh1D> mesh_;
  StepConfig config_;
  fem::RealTridiagonal mass_;
  fem::RealTridiagonal stiffness_;
  // Prefactorized step operator (Thomas elimination of L).
  std::vector<cplx> factor_sub_;
  std::vector<cplx> factor_super_;
  std::vector<cplx> factor_inv_diag_;
  // Scratch.
  std::vector<cplx> rhs_base_, rhs_, y_, y_next_, cubic_;
};

}  // namespace gpelab::stepper
