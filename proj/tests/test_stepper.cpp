#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <vector>

#include "gpelab/assembly.hpp"
#include "gpelab/errors.hpp"
#include "gpelab/field.hpp"
#include "gpelab/mesh.hpp"
#include "gpelab/stepper.hpp"
#include "gpelab/theory.hpp"

using namespace gpelab;
using fem::cplx;

namespace {

// Dense Gaussian elimination with partial pivoting, used as a solve oracle.
std::vector<cplx> dense_solve(std::vector<std::vector<cplx>> A,
                              std::vector<cplx> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(A[r][col]) > std::abs(A[pivot][col])) pivot = r;
    std::swap(A[col], A[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const cplx f = A[r][col] / A[col][col];
      for (std::size_t c = col; c < n; ++c) A[r][c] -= f * A[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<cplx> x(n);
  for (std::size_t i = n; i-- > 0;) {
    cplx acc = b[i];
    for (std::size_t c = i + 1; c < n; ++c) acc -= A[i][c] * x[c];
    x[i] = acc / A[i][i];
  }
  return x;
}

double l2_distance(const fem::ComplexField& a, const fem::ComplexField& b,
                   const fem::RealTridiagonal& mass) {
  fem::ComplexField diff = a;
  for (std::size_t i = 0; i < diff.values.size(); ++i)
    diff.values[i] -= b.values[i];
  return std::sqrt(fem::discrete_mass(diff, mass));
}

fem::ComplexField soliton_field(std::shared_ptr<const fem::Mesh1D> mesh,
                                const theory::PhysParams& p, double t) {
  return fem::project(
      mesh, [&](double x) { return theory::soliton_exact(p, x, t); });
}

}  // namespace

TEST_CASE("thomas solve inverts the identity and a 2x2 system exactly") {
  fem::ComplexTridiagonal I(3);
  I.diag = {cplx(1.0), cplx(1.0), cplx(1.0)};
  const std::vector<cplx> rhs = {cplx(1.0, 2.0), cplx(-3.0), cplx(0.0, 1.0)};
  const auto x = stepper::thomas_solve(I, rhs);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(x[i] - rhs[i]) <= 1e-15);

  fem::ComplexTridiagonal A(2);
  A.diag = {cplx(2.0), cplx(2.0)};
  A.super = {cplx(1.0), cplx(0.0)};
  A.sub = {cplx(0.0), cplx(1.0)};
  const std::vector<cplx> rhs2 = {cplx(3.0), cplx(3.0)};
  const auto y = stepper::thomas_solve(A, rhs2);
  CHECK(std::abs(y[0] - 1.0) <= 1e-14);
  CHECK(std::abs(y[1] - 1.0) <= 1e-14);
}

TEST_CASE("thomas solve agrees with dense elimination on a random 50x50 system") {
  std::mt19937 rng(4711);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  const std::size_t n = 50;
  fem::ComplexTridiagonal A(n);
  for (std::size_t i = 0; i < n; ++i) {
    A.diag[i] = cplx(3.0 + d(rng), d(rng));  // diagonally dominant
    if (i > 0) A.sub[i] = cplx(d(rng), d(rng));
    if (i + 1 < n) A.super[i] = cplx(d(rng), d(rng));
  }
  std::vector<cplx> rhs(n);
  for (auto& v : rhs) v = cplx(d(rng), d(rng));

  std::vector<std::vector<cplx>> dense(n, std::vector<cplx>(n, cplx(0.0)));
  for (std::size_t i = 0; i < n; ++i) {
    dense[i][i] = A.diag[i];
    if (i > 0) dense[i][i - 1] = A.sub[i];
    if (i + 1 < n) dense[i][i + 1] = A.super[i];
  }
  const auto got = stepper::thomas_solve(A, rhs);
  const auto want = dense_solve(dense, rhs);
  for (std::size_t i = 0; i < n; ++i)
    CHECK(std::abs(got[i] - want[i]) <= 1e-10);
}

TEST_CASE("thomas solve signals a vanishing pivot") {
  fem::ComplexTridiagonal A(2);
  A.diag = {cplx(0.0), cplx(1.0)};
  A.super = {cplx(0.0), cplx(0.0)};
  A.sub = {cplx(0.0), cplx(0.0)};
  const std::vector<cplx> rhs = {cplx(1.0), cplx(1.0)};
  CHECK_THROWS_AS(stepper::thomas_solve(A, rhs), NumericalError);
}

TEST_CASE("cubic load vanishes on the zero field and matches row sums for constants") {
  const auto mesh = fem::Mesh1D::build(2.0, 3, 2);
  const auto M = fem::assemble_mass(*mesh);
  const std::size_t n = mesh->size();

  fem::ComplexField zero{mesh, std::vector<cplx>(n, cplx(0.0))};
  for (auto rule : {stepper::CubicRule::nodal, stepper::CubicRule::exact}) {
    const auto load = stepper::cubic_load(zero, M, rule);
    for (const auto& v : load) CHECK(std::abs(v) == 0.0);
  }

  const cplx c(0.8, -0.6);
  fem::ComplexField flat{mesh, std::vector<cplx>(n, c)};
  for (auto rule : {stepper::CubicRule::nodal, stepper::CubicRule::exact}) {
    const auto load = stepper::cubic_load(flat, M, rule);
    for (std::size_t i = 0; i < n; ++i) {
      const double left = i > 0 ? mesh->spacing(i - 1) : 0.0;
      const double right = i + 1 < n ? mesh->spacing(i) : 0.0;
      const cplx want = std::norm(c) * c * 0.5 * (left + right);
      CHECK(std::abs(load[i] - want) <= 1e-14);
    }
  }
}

TEST_CASE("cubic load is cubically homogeneous and phase equivariant") {
  const auto mesh = fem::Mesh1D::build(2.0, 4, 3);
  const auto M = fem::assemble_mass(*mesh);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<cplx> vals(mesh->size());
  for (auto& v : vals) v = cplx(d(rng), d(rng));
  fem::ComplexField u{mesh, vals};

  for (auto rule : {stepper::CubicRule::nodal, stepper::CubicRule::exact}) {
    const auto base = stepper::cubic_load(u, M, rule);

    fem::ComplexField doubled = u;
    for (auto& v : doubled.values) v *= 2.0;
    const auto scaled = stepper::cubic_load(doubled, M, rule);
    for (std::size_t i = 0; i < base.size(); ++i)
      CHECK(std::abs(scaled[i] - 8.0 * base[i]) <= 1e-12);

    const cplx phase = std::polar(1.0, 0.9);
    fem::ComplexField rotated = u;
    for (auto& v : rotated.values) v *= phase;
    const auto turned = stepper::cubic_load(rotated, M, rule);
    for (std::size_t i = 0; i < base.size(); ++i)
      CHECK(std::abs(turned[i] - phase * base[i]) <= 1e-13);
  }
}

TEST_CASE("exact cubic load matches per-element Gauss quadrature of the interpolant") {
  const auto mesh = fem::Mesh1D::build(2.0, 3, 2);
  const auto M = fem::assemble_mass(*mesh);
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<cplx> vals(mesh->size());
  for (auto& v : vals) v = cplx(d(rng), d(rng));
  fem::ComplexField u{mesh, vals};

  // 3-point Gauss on [0,1] integrates the quartic integrand exactly.
  const double g = std::sqrt(0.6);
  const double pts[3] = {0.5 * (1.0 - g), 0.5, 0.5 * (1.0 + g)};
  const double wts[3] = {5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0};

  const std::size_t n = mesh->size();
  std::vector<cplx> oracle(n, cplx(0.0));
  for (std::size_t e = 0; e + 1 < n; ++e) {
    const double h = mesh->spacing(e);
    const cplx a = vals[e], b = vals[e + 1];
    for (int k = 0; k < 3; ++k) {
      const double s = pts[k];
      const cplx y = a + (b - a) * s;
      const cplx f = std::norm(y) * y;
      oracle[e] += wts[k] * h * f * (1.0 - s);
      oracle[e + 1] += wts[k] * h * f * s;
    }
  }
  const auto load = stepper::cubic_load(u, M, stepper::CubicRule::exact);
  for (std::size_t i = 0; i < n; ++i)
    CHECK(std::abs(load[i] - oracle[i]) <= 1e-14);
}

TEST_CASE("one midpoint step tracks the exact soliton to 1e-6") {
  theory::PhysParams p;
  p.v = 3.0;
  p.x0 = -3.0;
  const auto mesh = fem::Mesh1D::build(14.0, 1350, 50);  // uniform h = 0.01
  const auto u0 = soliton_field(mesh, p, 0.0);

  stepper::StepConfig cfg;
  cfg.dt = 1e-3;
  const auto M = fem::assemble_mass(*mesh);
  stepper::Stepper stepper(mesh, cfg);
  const auto u1 = stepper.step(u0);
  const auto exact = soliton_field(mesh, p, cfg.dt);
  CHECK(l2_distance(u1, exact, M) <= 1e-6);
}

TEST_CASE("linear mode conserves the discrete mass to near rounding") {
  const auto mesh = fem::Mesh1D::build(10.0, 190, 10);
  auto u0 = fem::project(mesh, [](double x) {
    return std::polar(1.0 / std::cosh(x + 5.0), 3.0 * x);
  });
  // The scheme freezes the end values, so exact conservation is a property
  // of fields that vanish there; kill the sech tails explicitly.
  u0.values.front() = 0.0;
  u0.values.back() = 0.0;
  stepper::StepConfig cfg;
  cfg.dt = 1e-3;
  cfg.q = 3.0;
  cfg.nonlinear = false;
  stepper::Stepper stepper(mesh, cfg);
  stepper::EvolveOptions opts;
  opts.sample_stride = 1;
  const auto traj = stepper.evolve(u0, 0.1, opts);
  const double m0 = traj.mass.front();
  for (double m : traj.mass)
    CHECK(std::abs(m - m0) <= 1e-13 * m0);
}

TEST_CASE("stepping commutes with a global phase") {
  theory::PhysParams p;
  p.v = 2.0;
  p.x0 = -4.0;
  const auto mesh = fem::Mesh1D::build(10.0, 190, 10);
  const auto u0 = soliton_field(mesh, p, 0.0);
  fem::ComplexField rotated = u0;
  const cplx phase = std::polar(1.0, 1.234);
  for (auto& v : rotated.values) v *= phase;

  stepper::StepConfig cfg;
  cfg.dt = 2e-3;
  cfg.q = 1.0;
  stepper::Stepper a(mesh, cfg), b(mesh, cfg);
  fem::ComplexField ua = u0, ub = rotated;
  for (int k = 0; k < 5; ++k) {
    ua = a.step(ua);
    ub = b.step(ub);
  }
  for (std::size_t i = 0; i < ua.values.size(); ++i)
    CHECK(std::abs(ub.values[i] - phase * ua.values[i]) <= 1e-13);
}

TEST_CASE("residual-controlled sweeps reproduce the fixed-iteration fixed point") {
  theory::PhysParams p;
  p.v = 2.0;
  p.x0 = -4.0;
  const auto mesh = fem::Mesh1D::build(10.0, 190, 10);
  const auto u0 = soliton_field(mesh, p, 0.0);

  stepper::StepConfig full;
  full.dt = 1e-3;
  full.iterations = 40;
  stepper::StepConfig stopped = full;
  stopped.residual_stop = true;

  stepper::Stepper a(mesh, full), b(mesh, stopped);
  const auto ua = a.step(u0);
  const auto ub = b.step(u0);
  for (std::size_t i = 0; i < ua.values.size(); ++i)
    CHECK(std::abs(ua.values[i] - ub.values[i]) <= 1e-12);
}

TEST_CASE("evolve aborts when the discrete mass drifts beyond the configured tolerance") {
  theory::PhysParams p;
  p.v = 2.0;
  p.x0 = -4.0;
  const auto mesh = fem::Mesh1D::build(8.0, 75, 5);  // h = 0.1, deliberately coarse
  const auto u0 = soliton_field(mesh, p, 0.0);
  stepper::StepConfig cfg;
  cfg.dt = 0.01;
  cfg.mass_drift_tol = 1e-12;
  stepper::Stepper stepper(mesh, cfg);
  stepper::EvolveOptions opts;
  opts.sample_stride = 1;
  CHECK_THROWS_AS(stepper.evolve(u0, 1.0, opts), NumericalError);
}

TEST_CASE("soliton transport converges at second order under joint grid refinement") {
  theory::PhysParams p;
  p.v = 3.0;
  p.x0 = -2.0;
  const double t_final = 0.25;

  // R = 12 keeps the frozen-boundary sech tails below the discretization
  // error; a tighter box floors the refinement at the tail amplitude.
  const auto error_at = [&](double h, double dt) {
    const int outer = static_cast<int>(std::lround(11.5 / h));
    const int inner = static_cast<int>(std::lround(0.5 / h));
    const auto mesh = fem::Mesh1D::build(12.0, outer, inner);
    stepper::StepConfig cfg;
    cfg.dt = dt;
    stepper::Stepper stepper(mesh, cfg);
    const auto traj = stepper.evolve(soliton_field(mesh, p, 0.0), t_final);
    const auto exact = soliton_field(mesh, p, t_final);
    return l2_distance(traj.final_state, exact, fem::assemble_mass(*mesh));
  };

  const double coarse = error_at(0.05, 2.5e-3);
  const double fine = error_at(0.025, 1.25e-3);
  const double order = std::log2(coarse / fine);
  CHECK(order >= 1.8);
  CHECK(order <= 2.5);
}

TEST_CASE("evolve samples series, stores snapshots and pins the boundary values") {
  theory::PhysParams p;
  p.v = 2.0;
  p.x0 = -4.0;
  const auto mesh = fem::Mesh1D::build(10.0, 95, 5);
  const auto u0 = soliton_field(mesh, p, 0.0);
  stepper::StepConfig cfg;
  cfg.dt = 5e-3;
  stepper::Stepper stepper(mesh, cfg);
  stepper::EvolveOptions opts;
  opts.sample_stride = 4;
  opts.snapshot_interval = 0.1;
  opts.observers.emplace_back(
      "sup", [](double, const fem::ComplexField& u) {
        double m = 0.0;
        for (const auto& v : u.values) m = std::max(m, std::abs(v));
        return m;
      });
  const auto traj = stepper.evolve(u0, 0.35, opts);

  REQUIRE(!traj.times.empty());
  CHECK(traj.times.front() == 0.0);
  CHECK(traj.times.back() == doctest::Approx(0.35).epsilon(1e-12));
  CHECK(traj.mass.size() == traj.times.size());
  CHECK(traj.center.size() == traj.times.size());
  REQUIRE(traj.series.size() == 1);
  CHECK(traj.series_names[0] == "sup");
  CHECK(traj.series[0].size() == traj.times.size());
  for (double s : traj.series[0]) CHECK(s > 0.0);

  REQUIRE(traj.snapshot_times.size() == 4);  // t = 0, 0.1, 0.2, 0.3
  CHECK(traj.snapshot_times[0] == 0.0);
  CHECK(traj.snapshot_times[2] == doctest::Approx(0.2).epsilon(1e-9));

  CHECK(traj.final_state.values.front() == u0.values.front());
  CHECK(traj.final_state.values.back() == u0.values.back());
  CHECK_THROWS_AS(stepper.evolve(u0, -1.0), std::invalid_argument);
}
