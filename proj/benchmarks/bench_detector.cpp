#include "cacc/scenario.hpp"
#include "cacc/simulation.hpp"
#include "cacc/smo_observer.hpp"
#include "cacc/thresholds.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace cacc;

static void BM_ObserverStep(benchmark::State& state) {
    const ErrorMatrices mats = build_error_matrices(CaccGains{}, VehicleParams{});
    SlidingModeObserver obs(ObserverConfig{}, mats, 1e-3);
    obs.start(0.0, Vec2::Zero());
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> d(-0.1, 0.1);
    double t = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(obs.step(t, Vec2(d(rng), d(rng))));
        t += 1e-3;
    }
}
BENCHMARK(BM_ObserverStep);

static void BM_ThresholdUpdate(benchmark::State& state) {
    const ErrorMatrices mats = build_error_matrices(CaccGains{}, VehicleParams{});
    const ThresholdModel model{ObserverConfig{}, mats, NoiseModel{}, CaccGains{}, 0.0};
    ThresholdMonitor monitor(model, CommMode::Continuous);
    monitor.start(0.0);
    std::size_t k = 0;
    int sign = 1;
    for (auto _ : state) {
        std::array<std::optional<SwitchEvent>, 2> sw;
        const double t = k * 1e-3;
        if (k % 5 == 0) {
            sign = -sign;
            sw[1] = SwitchEvent{t, 1, sign};
        }
        benchmark::DoNotOptimize(monitor.observe(k, t, Vec2(0.01, 0.02), sw));
        ++k;
    }
}
BENCHMARK(BM_ThresholdUpdate);

static void BM_Retroactive(benchmark::State& state) {
    const ErrorMatrices mats = build_error_matrices(CaccGains{}, VehicleParams{});
    const ThresholdModel model{ObserverConfig{}, mats, NoiseModel{}, CaccGains{}, 0.0};
    std::vector<WindowSample> window(static_cast<std::size_t>(state.range(0)));
    int sign = 1;
    for (std::size_t k = 0; k < window.size(); ++k) {
        window[k] = {k, k * 1e-3, Vec2(0.01, 0.02), {}};
        if (k % 5 == 0) window[k].switches[1] = SwitchEvent{k * 1e-3, 1, sign = -sign};
    }
    const ChainState start = seed_chains(model);
    for (auto _ : state) benchmark::DoNotOptimize(retroactive_update(start, window, 0.3, model));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Retroactive)->Arg(100)->Arg(1000);

static void BM_FullRun(benchmark::State& state) {
    ScenarioConfig cfg;
    cfg.comm_mode = state.range(0) ? CommMode::EventTriggered : CommMode::Continuous;
    for (auto _ : state) benchmark::DoNotOptimize(run(cfg));
}
BENCHMARK(BM_FullRun)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
