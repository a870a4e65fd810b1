#include <cmath>
#include <numbers>

#include <benchmark/benchmark.h>

#include "camel/capacity.hpp"
#include "camel/flow.hpp"
#include "camel/waveform.hpp"

using namespace camel;

namespace {

constexpr double kPi = std::numbers::pi;

Exec mode(const benchmark::State& st) { return st.range(0) == 0 ? Exec::serial : Exec::parallel; }

void BM_ShadowAreas(benchmark::State& st)
{
    const SymplectomorphismSpec f = random_symplectomorphism(2, 7);
    ShadowOptions opt;
    opt.grid_res = 512;
    opt.samples = 200000;
    opt.exec = mode(st);
    for(auto _ : st)
        benchmark::DoNotOptimize(shadow_areas(f, 1.0, opt));
    st.SetItemsProcessed(st.iterations() * opt.samples);
}

void BM_ActionGrid(benchmark::State& st)
{
    const auto H = HamiltonianSpec::quartic(Vec::Ones(1), 0.3);
    const Vec xs = Vec::LinSpaced(40, -1.0, 1.0), ts = Vec::LinSpaced(20, 0.5, 1.5);
    for(auto _ : st)
        benchmark::DoNotOptimize(sample_action_grid(H, 0.1, 0.0, xs, ts, 200, mode(st)));
    st.SetItemsProcessed(st.iterations() * xs.size() * ts.size());
}

void BM_Evolve(benchmark::State& st)
{
    const auto H = HamiltonianSpec::quartic(Vec::Ones(1), 0.5);
    const Waveform psi = Waveform::make(TorusSpec(Vec::Ones(1)), 1.0);
    const WaveformSnapshot s0 = sample_waveform(psi, circle_labels(0.0, 2 * kPi, 256));
    for(auto _ : st)
        benchmark::DoNotOptimize(evolve(s0, H, 1.0, 200, mode(st)));
    st.SetItemsProcessed(st.iterations() * 256);
}

void BM_VanVleck(benchmark::State& st)
{
    const double k = 0.6;
    InitialWave1D chirp;
    chirp.phi = [k](double x) { return 0.5 * k * x * x; };
    chirp.dphi = [k](double x) { return k * x; };
    chirp.ddphi = [k](double) { return k; };
    chirp.amp = [](double x) { return std::exp(-0.5 * x * x); };
    const auto H = HamiltonianSpec::quartic(Vec::Ones(1), 0.2);
    const Vec xs = Vec::LinSpaced(1024, -3.0, 3.0);
    for(auto _ : st)
        benchmark::DoNotOptimize(van_vleck_propagate(chirp, H, 1.0, 0.0, 0.5, xs, 200, mode(st)));
    st.SetItemsProcessed(st.iterations() * xs.size());
}

} // namespace

// Argument 0 runs the serial reference path, 1 the OpenMP path.
BENCHMARK(BM_ShadowAreas)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ActionGrid)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Evolve)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_VanVleck)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
