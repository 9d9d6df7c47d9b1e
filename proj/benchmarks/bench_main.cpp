// Micro benchmarks for the hot paths: the Lasso path, the SSnet sweep, ML
// refits and the delta_k enumeration. Data come from the built-in plans.

#include "ssnet/harness.hpp"
#include "ssnet/lasso.hpp"
#include "ssnet/refit.hpp"
#include "ssnet/selection.hpp"
#include "ssnet/simgen.hpp"
#include "ssnet/theory.hpp"

#include <benchmark/benchmark.h>

using namespace ssnet;

namespace {

Dataset desk_data(const char* plan) {
    return to_unit_norm(generate_replication(plan_by_name(plan), 1, 0).train);
}

void BM_LassoPath(benchmark::State& state) {
    const Dataset d = desk_data(state.range(0) == 0 ? "N.1.5-desk" : "B.1.5-desk");
    const LambdaGrid grid = default_lambda_grid(d, 50);
    for (auto _ : state) benchmark::DoNotOptimize(fit_lasso_path(d, grid));
}
BENCHMARK(BM_LassoPath)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Ssnet(benchmark::State& state) {
    const ExperimentPlan& plan = plan_by_name("N.1.5-desk");
    const Dataset d = desk_data("N.1.5-desk");
    const LambdaGrid input = default_lambda_grid(d, static_cast<int>(state.range(0)));
    const std::vector<double> c = default_c_list();
    const LambdaGrid output = gic_output_grid(Family::kQuadratic, d.p(), c, plan.sigma2);
    for (auto _ : state) benchmark::DoNotOptimize(select_ssnet(d, input, output));
}
BENCHMARK(BM_Ssnet)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_Refit(benchmark::State& state) {
    const Dataset d = desk_data(state.range(0) == 0 ? "N.1.5-desk" : "B.1.5-desk");
    std::vector<Index> J;
    for (Index j = 0; j < 10; ++j) J.push_back(3 * j);
    const SupportSet S = SupportSet::from_unsorted(J);
    for (auto _ : state) benchmark::DoNotOptimize(try_refit_ml(d, S));
}
BENCHMARK(BM_Refit)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_DeltaK(benchmark::State& state) {
    const Replication rep = generate_replication(plan_by_name("N.2.5-desk"), 1, 0);
    const Dataset d = to_unit_norm(rep.train);
    const double scale = std::sqrt(static_cast<double>(d.n()));
    const TrueModel truth = TrueModel::from_beta(rep.truth.beta * scale);
    for (auto _ : state) benchmark::DoNotOptimize(compute_delta_k(d.X, truth));
}
BENCHMARK(BM_DeltaK)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
