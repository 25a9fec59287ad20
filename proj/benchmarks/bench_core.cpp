// Microbenchmarks for the hot paths: the REML objective, full fits, the
// Simpson AUC, and one bootstrap replicate (resample + refit + AUC). The
// replicate cost dominates every bootstrap run, so replicates/second here
// predicts wall time for B = 2000 analyses directly.
#include <benchmark/benchmark.h>

#include "dtaboot/bootstrap.hpp"
#include "dtaboot/reml.hpp"
#include "dtaboot/simulate.hpp"
#include "dtaboot/sroc.hpp"
#include "dtaboot/study_data.hpp"

namespace {

using namespace dtaboot;

OutcomeSet make_outcomes(int n_studies) {
    SimScenario sc;
    sc.true_params = {1.2, -1.0, 0.5, 0.5, -0.4};
    sc.n_studies = n_studies;
    sc.n_pos = 150;
    sc.n_neg = 150;
    sc.seed = 4242;
    return to_outcomes(simulate_dataset(sc, 0));
}

void BM_RemlObjective(benchmark::State& state) {
    const OutcomeSet data = make_outcomes(static_cast<int>(state.range(0)));
    double sigma_a = 0.5;
    for (auto _ : state) {
        benchmark::DoNotOptimize(restricted_log_likelihood(sigma_a, 0.6, -0.3, data));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_RemlObjective)->Arg(10)->Arg(17)->Arg(44)->Arg(200);

void BM_FitReml(benchmark::State& state) {
    const OutcomeSet data = make_outcomes(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_reml(data));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_FitReml)->Arg(10)->Arg(17)->Arg(44)->Unit(benchmark::kMicrosecond);

void BM_ComputeAuc(benchmark::State& state) {
    const SrocCurve curve = hsroc_params(BivariateParams{1.2, -1.0, 0.5, 0.8, -0.3});
    const int resolution = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(compute_auc(curve, 0.0, 1.0, resolution).value);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ComputeAuc)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_BootstrapReplicate(benchmark::State& state) {
    const OutcomeSet data = make_outcomes(static_cast<int>(state.range(0)));
    const BivariateFit fit = fit_reml(data);
    std::uint64_t index = 0;
    for (auto _ : state) {
        RngStream stream = RngStream::from_key(7, index++, stream_tag::single);
        const OutcomeSet synthetic = resample_replicate(fit, data, ResamplingVariant::Normal, stream);
        const BivariateFit refit = fit_reml(synthetic);
        double auc = 0.0;
        if (refit.converged && !refit.boundary.any()) auc = compute_auc(hsroc_params(refit)).value;
        benchmark::DoNotOptimize(auc);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_BootstrapReplicate)->Arg(12)->Arg(17)->Unit(benchmark::kMicrosecond);

void BM_BinomialResample(benchmark::State& state) {
    const OutcomeSet data = make_outcomes(17);
    const BivariateFit fit = fit_reml(data);
    std::uint64_t index = 0;
    for (auto _ : state) {
        RngStream stream = RngStream::from_key(7, index++, stream_tag::single);
        benchmark::DoNotOptimize(
            resample_replicate(fit, data, ResamplingVariant::Binomial, stream));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_BinomialResample);

} // namespace

BENCHMARK_MAIN();
