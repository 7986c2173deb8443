#include <benchmark/benchmark.h>

#include <random>

#include "dampwave/multipliers.hpp"
#include "dampwave/specfun.hpp"
#include "dampwave/spectral.hpp"

using namespace dampwave;

static void BM_BesselJY(benchmark::State& state) {
  const double tau = std::pow(10.0, static_cast<double>(state.range(0)) / 2.0 - 2.0);
  double nu = -9.7;
  for (auto _ : state) {
    benchmark::DoNotOptimize(specfun::bessel_jy(nu, tau));
    nu = nu > 9.5 ? -9.7 : nu + 0.37;
  }
  state.SetLabel("tau=" + std::to_string(tau));
}
BENCHMARK(BM_BesselJY)->DenseRange(0, 10, 2);

static void BM_PhiValues(benchmark::State& state) {
  const auto p = SpeedProfile::polynomial(1.5);
  const double xi = std::pow(10.0, static_cast<double>(state.range(0)) - 3.0);
  double t = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(phi_values(3.0, p, 0.5, t, xi));
    t = t > 40.0 ? 1.0 : t + 0.731;
  }
  state.SetLabel("xi=" + std::to_string(xi));
}
BENCHMARK(BM_PhiValues)->DenseRange(0, 4);

static void BM_DuhamelStep(benchmark::State& state) {
  const Grid g{1, static_cast<int>(state.range(0)), 40.0};
  Fft fft(g);
  SpectralLayout lay(g);
  const auto p = SpeedProfile::constant();
  const auto d = make_initial_data(g, DataKind::gaussian, 0.1, 1.0, 0);
  auto st = FieldState::from_physical(g, 0.0, d.u0, d.u1, fft);
  const auto src = make_source({NonlinearForm::signed_power, 3.0, 0.0, NonlinearScaling::plain}, p);
  for (auto _ : state) duhamel_step(st, p, 4.0, src, 0.01, fft, lay);
}
BENCHMARK(BM_DuhamelStep)->RangeMultiplier(4)->Range(256, 4096)->Unit(benchmark::kMillisecond);

static void BM_LinearStep2D(benchmark::State& state) {
  const Grid g{2, static_cast<int>(state.range(0)), 20.0};
  Fft fft(g);
  SpectralLayout lay(g);
  const auto p = SpeedProfile::exponential(0.1);
  const auto d = make_initial_data(g, DataKind::mode_mix, 0.1, 2.0, 1);
  auto st = FieldState::from_physical(g, 0.0, d.u0, d.u1, fft);
  for (auto _ : state) linear_step(st, p, 3.0, 0.01, fft, lay);
}
BENCHMARK(BM_LinearStep2D)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
