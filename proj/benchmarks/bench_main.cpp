#include <cmath>
#include <numbers>
#include <vector>

#include <benchmark/benchmark.h>

#include "zeno/experiment.hpp"
#include "zeno/filters.hpp"
#include "zeno/noise.hpp"
#include "zeno/symmetric_eigen.hpp"

using namespace zeno;

namespace {

constexpr double khz(double f) { return 2 * std::numbers::pi * 1e3 * f; }

const FrequencyBand band{khz(100), khz(300)};
const GaussianPsd gaussian{khz(167), khz(50.0 / std::numbers::sqrt2), khz(12)};

std::vector<double> taus(int k) {
    const TauGrid g = make_tau_grid(1.5e-6, 4.5e-6, k);
    return {g.values().begin(), g.values().end()};
}

void BM_SampleRealization(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(sample_realization(gaussian, m, band, seed++));
    state.SetItemsProcessed(state.iterations() * m);
}
BENCHMARK(BM_SampleRealization)->Arg(100)->Arg(400)->Arg(1600);

void BM_Repetition(benchmark::State& state) {
    const double tau = 3e-6;
    const ControlWaveform c = square_wave_control(khz(43.3), 18, tau);
    const NoiseRealization r = sample_realization(gaussian, static_cast<int>(state.range(0)), band, 1);
    for (auto _ : state) benchmark::DoNotOptimize(simulate_repetition(c, r, tau, 1));
}
BENCHMARK(BM_Repetition)->Arg(400);

void BM_FilterBank(benchmark::State& state) {
    const auto t = taus(15);
    const FrequencyGrid grid(khz(100), khz(300), static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(square_wave_filter_bank(khz(43.3), 18, t, grid));
}
BENCHMARK(BM_FilterBank)->Arg(2001)->Arg(8001)->Unit(benchmark::kMillisecond);

void BM_Jacobi(benchmark::State& state) {
    const auto t = taus(static_cast<int>(state.range(0)));
    const FilterBank bank = square_wave_filter_bank(khz(43.3), 18, t, FrequencyGrid(khz(100), khz(300), 2001));
    for (auto _ : state) benchmark::DoNotOptimize(symmetric_eigendecomposition(bank.overlap));
}
BENCHMARK(BM_Jacobi)->Arg(15)->Arg(40);

void BM_ChiTheory(benchmark::State& state) {
    const EffectiveControl ec = effective_control(square_wave_control(khz(43.3), 18, 3e-6));
    for (auto _ : state) benchmark::DoNotOptimize(chi_theory(gaussian, ec, khz(100), khz(300)));
}
BENCHMARK(BM_ChiTheory);

// Whole default sweep, K = 15, at reduced Q.
void BM_Simulate(benchmark::State& state) {
    ExperimentConfig c = ExperimentConfig::defaults();
    c.noise = gaussian;
    c.protocol.repetitions = static_cast<int>(state.range(0));
    c.workers = 1;
    for (auto _ : state) benchmark::DoNotOptimize(simulate(c));
    state.SetItemsProcessed(state.iterations() * 15 * state.range(0));
}
BENCHMARK(BM_Simulate)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
