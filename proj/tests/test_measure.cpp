#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <vector>

#include "gpelab/assembly.hpp"
#include "gpelab/errors.hpp"
#include "gpelab/field.hpp"
#include "gpelab/measure.hpp"
#include "gpelab/mesh.hpp"
#include "gpelab/stepper.hpp"
#include "gpelab/theory.hpp"

using namespace gpelab;
using fem::cplx;

namespace {

fem::ComplexField random_field(std::shared_ptr<const fem::Mesh1D> mesh,
                               unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<cplx> vals(mesh->size());
  for (auto& v : vals) v = cplx(d(rng), d(rng));
  return {mesh, std::move(vals)};
}

}  // namespace

TEST_CASE("mass in a region sums the element quadrature of |u|^2") {
  const auto mesh = fem::Mesh1D::build(2.0, 3, 2);
  const auto u = random_field(mesh, 5);

  // [0, 0.5] covers the two elements right of the origin
  double expected = 0.0;
  const std::size_t o = mesh->origin_index();
  for (std::size_t e = o; e < o + 2; ++e) {
    const cplx a = u.values[e], b = u.values[e + 1];
    expected += mesh->spacing(e) *
                (std::norm(a) + std::norm(b) + (std::conj(a) * b).real()) / 3.0;
  }
  CHECK(measure::mass_in_region(u, 0.0, 0.5) ==
        doctest::Approx(expected).epsilon(1e-14));

  const double total = measure::mass_in_region(u, -2.0, 2.0);
  CHECK(total == doctest::Approx(
                     fem::discrete_mass(u, fem::assemble_mass(*mesh)))
                     .epsilon(1e-13));

  CHECK_THROWS_AS(measure::mass_in_region(u, 0.0, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(measure::mass_in_region(u, 0.5, 0.5), std::invalid_argument);
}

TEST_CASE("the mass partition is additive against half the discrete mass") {
  const auto mesh = fem::Mesh1D::build(20.0, 550, 40);
  const auto u = random_field(mesh, 17);
  const auto part = measure::mass_partition(u, 3.5);
  const double half =
      0.5 * fem::discrete_mass(u, fem::assemble_mass(*mesh));
  CHECK(part.time == 3.5);
  CHECK(part.transmitted + part.reflected + part.trapped ==
        doctest::Approx(half).epsilon(1e-12));
  CHECK(part.transmitted > 0.0);
  CHECK(part.reflected > 0.0);
  CHECK(part.trapped > 0.0);
}

TEST_CASE("an incoming soliton far to the left sits entirely in the reflected region") {
  theory::PhysParams p;
  p.v = 3.0;
  p.x0 = -10.0;
  const auto mesh = fem::Mesh1D::build(20.0, 550, 40);
  const auto u = fem::project(
      mesh, [&](double x) { return theory::soliton_exact(p, x, 0.0); });
  const auto part = measure::mass_partition(u);
  const double half = part.transmitted + part.reflected + part.trapped;
  CHECK(part.transmitted / half <= 1e-8);
  CHECK(part.trapped / half <= 1e-6);
  CHECK(part.reflected / half == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("stabilized limit returns the trailing mean only for settled series") {
  std::vector<double> times, flat, ramp;
  for (int i = 0; i <= 400; ++i) {
    const double t = 0.25 * i;
    times.push_back(t);
    flat.push_back(0.7 + 1e-9 * std::sin(0.5 * t));
    ramp.push_back(0.05 * t);
  }
  const auto settled = measure::stabilized_limit(times, flat, 10.0, 1e-2);
  REQUIRE(settled.has_value());
  CHECK(*settled == doctest::Approx(0.7).epsilon(1e-8));

  CHECK(!measure::stabilized_limit(times, ramp, 10.0, 1e-2).has_value());
  // a series spanning less than two windows cannot be judged
  CHECK(!measure::stabilized_limit(times, flat, 60.0, 1e-2).has_value());
  CHECK_THROWS_AS(measure::stabilized_limit(times, flat, -1.0, 1e-2),
                  std::invalid_argument);
  // a single sample spans no time at all, so it cannot be judged either
  const std::vector<double> short_times = {0.0};
  const std::vector<double> short_vals = {1.0};
  CHECK(!measure::stabilized_limit(short_times, short_vals, 1.0, 1e-2)
             .has_value());
  CHECK_THROWS_AS(measure::stabilized_limit({}, {}, 1.0, 1e-2),
                  std::invalid_argument);
}

TEST_CASE("window mean averages exactly the trailing samples") {
  std::vector<double> times, vals;
  for (int i = 0; i <= 10; ++i) {
    times.push_back(static_cast<double>(i));
    vals.push_back(static_cast<double>(i));
  }
  CHECK(measure::window_mean(times, vals, 3.0) ==
        doctest::Approx(8.5).epsilon(1e-15));
  CHECK(measure::window_mean(times, vals, 100.0) ==
        doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("profile distance vanishes on the comparison profile itself") {
  theory::PhysParams p;
  p.q = 3.0;
  p.v = 3.0;
  p.x0 = -10.0;
  const double t = 3.4;
  const auto sc = theory::delta_scattering(p.q, p.v);
  const auto mesh = fem::Mesh1D::build(30.0, 737, 25);
  const auto u = fem::project(mesh, [&](double x) {
    const cplx rot = std::polar(1.0, 0.5 * t * (1.0 - p.v * p.v));
    const cplx fwd = sc.t * std::polar(1.0, p.v * x) /
                     std::cosh(x - p.x0 - p.v * t);
    const cplx bwd = sc.r * std::polar(1.0, -p.v * x) /
                     std::cosh(x + p.x0 + p.v * t);
    return rot * (fwd + bwd);
  });
  CHECK(measure::profile_distance(u, p, t) <= 1e-10);
  // a mismatched impurity strength must be clearly distinguishable
  theory::PhysParams wrong = p;
  wrong.q = 1.0;
  CHECK(measure::profile_distance(u, wrong, t) > 1e-2);

  theory::PhysParams bad = p;
  bad.amplitude = 2.0;
  CHECK_THROWS_AS(measure::profile_distance(u, bad, t), std::invalid_argument);
}

TEST_CASE("truncating a transmitted sech pulse recovers its envelope without carrier") {
  const double v = 3.0, center = 6.0;
  const auto sc = theory::delta_scattering(3.0, v);
  const auto mesh = fem::Mesh1D::build(30.0, 590, 10);
  const auto u = fem::project(mesh, [&](double x) {
    return sc.t * std::polar(1.0, v * x) / std::cosh(x - center);
  });

  const auto piece =
      measure::truncate_reembed(u, measure::Side::transmitted, v, 40.0, 1600);
  // reference: one-sided restriction with the carrier stripped the same way
  // (the carrier-bearing discrete mass is low by (vh)^2/6 and is not the
  // quantity the re-embedding preserves)
  fem::ComplexField trunc = u;
  for (std::size_t i = 0; i < trunc.values.size(); ++i) {
    const double x = trunc.mesh->node(i);
    trunc.values[i] = x < 0.0 ? cplx(0.0)
                              : trunc.values[i] * std::polar(1.0, -v * x);
  }
  const double side_mass = measure::mass_in_region(trunc, -30.0, 30.0);
  const double piece_mass =
      measure::mass_in_region(piece, -40.0, 40.0);
  CHECK(piece_mass == doctest::Approx(side_mass).epsilon(1e-12));

  // centroid moved to the origin, carrier momentum stripped
  double centroid = 0.0;
  const auto& nodes = piece.mesh->nodes();
  for (std::size_t e = 0; e + 1 < nodes.size(); ++e) {
    const double h = piece.mesh->spacing(e);
    const double mid = 0.5 * (nodes[e] + nodes[e + 1]);
    const cplx a = piece.values[e], b = piece.values[e + 1];
    centroid += mid * h *
                (std::norm(a) + std::norm(b) + (std::conj(a) * b).real()) / 3.0;
  }
  CHECK(std::abs(centroid) <= 1e-2 * piece_mass);
  CHECK(std::abs(measure::momentum(piece)) <= 1e-3 * piece_mass);

  const double amp = std::abs(sc.t);
  for (double x : {-2.0, -0.5, 0.0, 1.0, 2.5})
    CHECK(std::abs(fem::interpolate(piece, x)) ==
          doctest::Approx(amp / std::cosh(x)).epsilon(5e-3));
}

TEST_CASE("truncation rejects a side carrying almost no mass") {
  const auto mesh = fem::Mesh1D::build(30.0, 590, 10);
  const auto u = fem::project(mesh, [](double x) {
    return std::polar(1.0, -3.0 * x) / std::cosh(x + 8.0);
  });
  CHECK_THROWS_AS(
      measure::truncate_reembed(u, measure::Side::transmitted, 3.0, 40.0, 1600),
      NumericalError);
  CHECK_THROWS_AS(
      measure::truncate_reembed(u, measure::Side::reflected, 0.0, 40.0, 1600),
      std::invalid_argument);
}

TEST_CASE("resolving a stationary soliton returns its amplitude, stabilized") {
  const double A = 0.8;
  const auto mesh = fem::Mesh1D::build(40.0, 790, 10);  // uniform h = 0.05
  const auto piece = fem::project(mesh, [&](double x) {
    return cplx(A / std::cosh(A * x), 0.0);
  });

  stepper::StepConfig cfg;
  cfg.dt = 5e-3;
  const auto res =
      measure::resolve_amplitude(piece, measure::Side::transmitted, 30.0, cfg);
  CHECK(res.side == measure::Side::transmitted);
  CHECK(res.measured_amplitude == doctest::Approx(A).epsilon(0.02));
  CHECK(res.stabilized);
  CHECK(res.window_end == doctest::Approx(30.0).epsilon(1e-9));
  CHECK(res.window_begin < res.window_end);
  REQUIRE(!res.times.empty());
  CHECK(res.times.size() == res.sup_abs.size());

  stepper::StepConfig bad = cfg;
  bad.q = 1.0;
  CHECK_THROWS_AS(
      measure::resolve_amplitude(piece, measure::Side::transmitted, 30.0, bad),
      std::invalid_argument);
  bad = cfg;
  bad.nonlinear = false;
  CHECK_THROWS_AS(
      measure::resolve_amplitude(piece, measure::Side::transmitted, 30.0, bad),
      std::invalid_argument);
}

TEST_CASE("resolution flags boundary contamination on a too-small grid") {
  const auto mesh = fem::Mesh1D::build(5.0, 90, 10);  // uniform h = 0.05
  const auto piece = fem::project(mesh, [](double x) {
    return cplx(1.0 / std::cosh(x), 0.0);
  });
  stepper::StepConfig cfg;
  cfg.dt = 5e-3;
  CHECK_THROWS_AS(
      measure::resolve_amplitude(piece, measure::Side::reflected, 1.0, cfg),
      NumericalError);
}

TEST_CASE("the impurity deviation vanishes at q = 0 and is tiny for far-away data") {
  const auto mesh = fem::Mesh1D::build(30.0, 295, 5);
  const auto far = fem::project(mesh, [](double x) {
    return cplx(1.0 / std::cosh(x - 15.0), 0.0);
  });
  stepper::StepConfig cfg;
  cfg.dt = 2e-3;
  cfg.q = 0.0;
  CHECK(measure::nls_q_vs_nls_0_deviation(far, 0.5, cfg) == 0.0);
  cfg.q = 50.0;
  CHECK(measure::nls_q_vs_nls_0_deviation(far, 0.5, cfg) <= 1e-3);
}

TEST_CASE("center phase deviation is zero for the resolved rotation and recovers drifts") {
  const double alpha = 0.8;
  const double rate = 0.5 * (2.0 * alpha - 1.0) * (2.0 * alpha - 1.0);
  stepper::Trajectory traj;
  for (int i = 0; i <= 100; ++i) {
    const double t = 0.05 * i;
    traj.times.push_back(t);
    traj.center.push_back(std::polar(0.6, rate * t + 0.3));
  }
  const auto devs = measure::center_phase_deviation(traj, alpha);
  REQUIRE(devs.size() == traj.times.size());
  for (double d : devs) CHECK(std::abs(d) <= 1e-12);

  stepper::Trajectory drifting = traj;
  for (std::size_t i = 0; i < drifting.center.size(); ++i)
    drifting.center[i] *= std::polar(1.0, 0.02 * drifting.times[i]);
  const auto drift = measure::center_phase_deviation(drifting, alpha);
  CHECK(drift.back() == doctest::Approx(0.02 * 5.0).epsilon(1e-9));

  stepper::Trajectory faint = traj;
  faint.center[50] = cplx(1e-9, 0.0);
  CHECK_THROWS_AS(measure::center_phase_deviation(faint, alpha), NumericalError);

  stepper::Trajectory jumpy = traj;
  for (std::size_t i = 60; i < jumpy.center.size(); ++i)
    jumpy.center[i] *= std::polar(1.0, 3.0);
  CHECK_THROWS_AS(measure::center_phase_deviation(jumpy, alpha), NumericalError);

  CHECK_THROWS_AS(measure::center_phase_deviation(traj, 0.5),
                  std::invalid_argument);
}

TEST_CASE("discrete momentum sees the carrier wavenumber and flips under conjugation") {
  const auto mesh = fem::Mesh1D::build(20.0, 390, 10);
  const auto u = fem::project(mesh, [](double x) {
    return std::polar(1.0 / std::cosh(x), 2.0 * x);
  });
  const double mass = measure::mass_in_region(u, -20.0, 20.0);
  const double p = measure::momentum(u);
  CHECK(p == doctest::Approx(2.0 * mass).epsilon(1e-2));

  fem::ComplexField conj_u = u;
  for (auto& v : conj_u.values) v = std::conj(v);
  CHECK(measure::momentum(conj_u) == doctest::Approx(-p).epsilon(1e-12));
}

TEST_CASE("sup_abs returns the largest nodal modulus") {
  const auto mesh = fem::Mesh1D::build(2.0, 3, 2);
  auto u = random_field(mesh, 3);
  u.values[4] = cplx(3.0, -4.0);
  CHECK(measure::sup_abs(u) == 5.0);
}
