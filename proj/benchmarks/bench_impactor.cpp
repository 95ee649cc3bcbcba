#include <benchmark/benchmark.h>

#include <random>

#include "impactor/analysis.hpp"
#include "impactor/impact.hpp"
#include "impactor/kalman.hpp"
#include "impactor/priors.hpp"
#include "impactor/sampler.hpp"
#include "support/synthetic.hpp"

using namespace impactor;

namespace {

struct Design {
    std::vector<double> y;
    Eigen::MatrixXd x;
    PriorSet priors;
};

// Standardised pre-period of a synthetic panel, intercept first: the shape the sampler sees in practice.
Design design(Eigen::Index k) {
    const auto panel = testing::synthetic_panel(3, {"PL"});
    const auto split = split_periods(panel, 2004);
    const auto n = static_cast<Eigen::Index>(split.pre_years.size());
    const auto z = standardize(panel.series("PL"), 0, static_cast<std::size_t>(n));
    Design d;
    d.y.assign(z.values.begin(), z.values.begin() + n);
    d.x = Eigen::MatrixXd::Ones(n, k + 1);
    for (Eigen::Index j = 0; j < k; ++j) {
        const auto c = standardize(panel.series(testing::kControls[static_cast<std::size_t>(j)]), 0,
                                   static_cast<std::size_t>(n));
        for (Eigen::Index t = 0; t < n; ++t) d.x(t, j + 1) = c.values[static_cast<std::size_t>(t)];
    }
    d.priors = default_priors(d.y, d.x, {}, Eigen::Index{0});
    return d;
}

}  // namespace

static void BM_KalmanFilter(benchmark::State& state) {
    const Design d = design(state.range(0));
    ModelParams p{0.1, 0.5, Eigen::VectorXd::Constant(d.x.cols(), 0.1), std::vector<std::uint8_t>(d.x.cols(), 1)};
    const SsmSpec spec = assemble(LocalLevelSpec{p.sigma_level}, RegressionSpec{d.x, p.beta, p.included}, p.sigma_obs);
    const InitialState init = assemble_initial(d.y.front(), 1.0, true);
    for (auto _ : state) benchmark::DoNotOptimize(kalman::filter(spec, init, d.y).loglik);
}
BENCHMARK(BM_KalmanFilter)->Arg(15);

static void BM_SimulateStates(benchmark::State& state) {
    const Design d = design(15);
    const SsmSpec spec = assemble(LocalLevelSpec{0.1}, RegressionSpec{d.x, Eigen::VectorXd::Zero(16), std::vector<std::uint8_t>(16, 0)}, 0.5);
    const InitialState init = assemble_initial(d.y.front(), 1.0, true);
    Rng rng(1);
    for (auto _ : state) benchmark::DoNotOptimize(kalman::simulate_states(spec, init, d.y, rng).trajectory.data());
}
BENCHMARK(BM_SimulateStates);

static void BM_SpikeSlabSweep(benchmark::State& state) {
    const Design d = design(state.range(0));
    const SpikeSlabSampler sampler(d.x, d.priors.slab);
    Rng rng(2);
    std::vector<std::uint8_t> g(static_cast<std::size_t>(d.x.cols()), 0);
    for (auto _ : state) {
        auto r = sampler.draw(d.y, g, rng);
        g = std::move(r.included);
    }
}
BENCHMARK(BM_SpikeSlabSweep)->Arg(3)->Arg(15);

static void BM_GibbsIterations(benchmark::State& state) {
    const Design d = design(15);
    const McmcConfig cfg{static_cast<std::size_t>(state.range(0)), 100, 3, 1};
    for (auto _ : state) benchmark::DoNotOptimize(run_gibbs(d.y, d.x, d.priors, cfg).draws.size());
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GibbsIterations)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_Forecast(benchmark::State& state) {
    const Design d = design(15);
    const auto draws = run_gibbs(d.y, d.x, d.priors, McmcConfig{20000, 2000, 4, 1});
    const Eigen::MatrixXd x_post = d.x.topRows(14);
    for (auto _ : state) {
        Rng rng(5);
        benchmark::DoNotOptimize(forecast_counterfactual(draws, x_post, rng, static_cast<unsigned>(state.range(0))).values.data());
    }
}
BENCHMARK(BM_Forecast)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_FullAnalysis(benchmark::State& state) {
    const auto panel = testing::synthetic_panel(7, {"PL"}, {{"PL", {2004, 0.5}}});
    AnalysisConfig c;
    c.target = "PL";
    c.intervention_year = 2004;
    for (auto _ : state) benchmark::DoNotOptimize(analyze(panel, c).summary.cumulative.p);
}
BENCHMARK(BM_FullAnalysis)->Unit(benchmark::kSecond)->Iterations(1);
BENCHMARK_MAIN();
