#include <benchmark/benchmark.h>

#include <random>

#include "morreylab/analysis.hpp"
#include "morreylab/bench.hpp"
#include "morreylab/solver.hpp"
#include "morreylab/spaces.hpp"

using namespace morreylab;

namespace {

double spacing(const benchmark::State& state) { return 1.0 / static_cast<double>(state.range(0)); }

void BM_MorreyNorm(benchmark::State& state) {
  const auto g = make_grid(DomainKind::UnitDisk, spacing(state));
  const ScalarField f = radial_case(0.5, 2.0, 2).source_field(g);
  const BallFamily fam = BallFamily::standard(*g, {{0.0, 0.0}});
  for (auto _ : state) benchmark::DoNotOptimize(morrey_norm(f, {1.0, 1.5}, fam).value);
}
BENCHMARK(BM_MorreyNorm)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_StummelModulus(benchmark::State& state) {
  const auto g = make_grid(DomainKind::UnitDisk, spacing(state));
  const ScalarField f = radial_case(0.5, 2.0, 2).source_field(g);
  const std::vector<Point> centers{{0.0, 0.0}};
  for (auto _ : state) benchmark::DoNotOptimize(stummel_modulus(f, 1.5, 0.2, centers).value);
}
BENCHMARK(BM_StummelModulus)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Gradient(benchmark::State& state) {
  const auto g = make_grid(DomainKind::UnitDisk, spacing(state));
  const ScalarField u = radial_case(0.5, 2.0, 2).exact_field(g);
  for (auto _ : state) benchmark::DoNotOptimize(gradient(u));
}
BENCHMARK(BM_Gradient)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_CampanatoExcess(benchmark::State& state) {
  const auto g = make_grid(DomainKind::UnitDisk, spacing(state));
  const VectorField du = radial_case(0.5, 2.0, 2).exact_gradient(g);
  const auto radii = default_excess_radii(*g, {0.0, 0.0});
  for (auto _ : state) benchmark::DoNotOptimize(campanato_excess(du, {0.0, 0.0}, radii, 2.0));
}
BENCHMARK(BM_CampanatoExcess)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Solve(benchmark::State& state) {
  const double p = static_cast<double>(state.range(1)) / 10.0;
  const BenchmarkCase bc = radial_case(0.5, p, 2);
  const auto g = make_grid(DomainKind::UnitDisk, spacing(state));
  const ScalarField f = bc.source_field(g);
  const ScalarField d = bc.exact_field(g);
  SolverConfig cfg;
  cfg.p = p;
  for (auto _ : state) benchmark::DoNotOptimize(solve_p_poisson(f, d, cfg).residual);
}
BENCHMARK(BM_Solve)->Args({32, 20})->Args({64, 20})->Args({32, 18})->Args({64, 18})->Unit(benchmark::kMillisecond);

void BM_FPBattery(benchmark::State& state) {
  const auto g = make_grid(DomainKind::UnitDisk, spacing(state));
  const ScalarField f = radial_case(0.5, 2.0, 2).source_field(g);
  for (auto _ : state) {
    std::mt19937_64 rng(42);
    benchmark::DoNotOptimize(fp_battery(f, {0.0, 0.0}, 1.5, 1.5, 6.3, 10, 0.06, 0.6, rng).max_ratio);
  }
}
BENCHMARK(BM_FPBattery)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
