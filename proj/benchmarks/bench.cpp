// Hot-path benchmarks: sampling, exact likelihood, one streaming
// E-step assembly (EM and VB weights), and the scalar moment kernels.

#include <benchmark/benchmark.h>

#include "assembly.hpp"
#include "kinising/em.hpp"
#include "kinising/likelihood.hpp"
#include "kinising/moments.hpp"
#include "kinising/sampler.hpp"
#include "kinising/vb.hpp"

using namespace kinising;

namespace {

IsingModel make_model(int n) {
    GenConfig cfg;
    cfg.n_spins = n;
    cfg.t_end = 1.0;
    cfg.g = 0.3;
    cfg.seed = 1;
    return generate_model(cfg, 100.0);
}

SpinTrajectory make_traj(const IsingModel& m, double t_end) {
    return gillespie_sample(m, random_state(m.n_spins(), 2), t_end, 3);
}

void BM_gillespie(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const IsingModel model = make_model(n);
    const IVec s0 = random_state(n, 2);
    std::uint64_t seed = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(gillespie_sample(model, s0, 10.0, seed++));
    state.SetItemsProcessed(state.iterations() *
                            static_cast<std::int64_t>(model.gamma * n * 10.0));
}
BENCHMARK(BM_gillespie)->Arg(10)->Arg(40);

void BM_log_likelihood(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const IsingModel model = make_model(n);
    const SpinTrajectory traj = make_traj(model, 10.0);
    for (auto _ : state) benchmark::DoNotOptimize(log_likelihood(traj, model));
    state.SetItemsProcessed(state.iterations() *
                            static_cast<std::int64_t>(traj.flips.size()));
}
BENCHMARK(BM_log_likelihood)->Arg(10)->Arg(40);

void BM_em_assembly(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const IsingModel model = make_model(n);
    const SpinTrajectory traj = make_traj(model, 10.0);
    for (auto _ : state) {
        detail::EmWeightModel w(traj, model);
        benchmark::DoNotOptimize(detail::assemble_streaming(traj, w));
    }
    state.SetItemsProcessed(state.iterations() *
                            static_cast<std::int64_t>(traj.n_intervals()));
}
BENCHMARK(BM_em_assembly)->Arg(10)->Arg(40);

void BM_vb_assembly(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const IsingModel model = make_model(n);
    const SpinTrajectory traj = make_traj(model, 10.0);
    RowPosteriorSet post = RowPosteriorSet::at_model(model);
    for (auto& s : post.sigma) s = 0.01 * Mat::Identity(n + 1, n + 1);
    for (auto _ : state) {
        detail::VbWeightModel w(traj, post, model.gamma);
        benchmark::DoNotOptimize(detail::assemble_streaming(traj, w));
    }
    state.SetItemsProcessed(state.iterations() *
                            static_cast<std::int64_t>(traj.n_intervals()));
}
BENCHMARK(BM_vb_assembly)->Arg(10)->Arg(40);

void BM_pg_mean(benchmark::State& state) {
    double c = 0.0;
    for (auto _ : state) {
        c += 1e-4;
        benchmark::DoNotOptimize(pg_mean(1.0, c));
    }
}
BENCHMARK(BM_pg_mean);

void BM_solve_row(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const IsingModel model = make_model(n);
    const SpinTrajectory traj = make_traj(model, 5.0);
    detail::EmWeightModel w(traj, model);
    const LinearSystem sys = detail::assemble_streaming(traj, w);
    for (auto _ : state)
        for (int i = 0; i < n; ++i) benchmark::DoNotOptimize(solve_row(sys, i, 1e-10));
}
BENCHMARK(BM_solve_row)->Arg(10)->Arg(40);

}  // namespace

BENCHMARK_MAIN();
