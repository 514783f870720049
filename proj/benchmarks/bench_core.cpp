#include <benchmark/benchmark.h>

#include <cmath>
#include <complex>

#include "gpelab/assembly.hpp"
#include "gpelab/field.hpp"
#include "gpelab/measure.hpp"
#include "gpelab/mesh.hpp"
#include "gpelab/stepper.hpp"
#include "gpelab/theory.hpp"

namespace {

using gpelab::fem::cplx;

std::shared_ptr<const gpelab::fem::Mesh1D> bench_mesh() {
  return gpelab::fem::Mesh1D::build(40.0, 1975, 50);
}

gpelab::fem::ComplexField bench_field() {
  const gpelab::theory::PhysParams params{3.0, 3.0, -10.0, 1.0, 0.0};
  return gpelab::fem::project(bench_mesh(), [&](double x) {
    return gpelab::theory::soliton_exact(params, x, 0.0);
  });
}

void BM_AssembleMass(benchmark::State& state) {
  const auto mesh = bench_mesh();
  for (auto _ : state)
    benchmark::DoNotOptimize(gpelab::fem::assemble_mass(*mesh));
}
BENCHMARK(BM_AssembleMass);

void BM_ThomasSolve(benchmark::State& state) {
  const auto mesh = bench_mesh();
  const auto mass = gpelab::fem::assemble_mass(*mesh);
  gpelab::fem::ComplexTridiagonal A(mass.size());
  for (std::size_t i = 0; i < mass.size(); ++i) {
    A.diag[i] = cplx(mass.diag[i], 0.1);
    A.sub[i] = cplx(mass.sub[i], 0.0);
    A.super[i] = cplx(mass.super[i], 0.0);
  }
  const auto u = bench_field();
  for (auto _ : state)
    benchmark::DoNotOptimize(gpelab::stepper::thomas_solve(A, u.values));
}
BENCHMARK(BM_ThomasSolve);

void BM_Step(benchmark::State& state) {
  gpelab::stepper::StepConfig config;
  config.dt = 1e-3;
  config.q = 3.0;
  gpelab::stepper::Stepper stepper(bench_mesh(), config);
  auto u = bench_field();
  for (auto _ : state) {
    u = stepper.step(u);
    benchmark::DoNotOptimize(u.values.data());
  }
}
BENCHMARK(BM_Step);

void BM_MassPartition(benchmark::State& state) {
  const auto u = bench_field();
  for (auto _ : state)
    benchmark::DoNotOptimize(gpelab::measure::mass_partition(u, 0.0));
}
BENCHMARK(BM_MassPartition);

void BM_Phi0(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(gpelab::theory::phi0(0.8));
}
BENCHMARK(BM_Phi0);

}  // namespace

BENCHMARK_MAIN();
