#include <benchmark/benchmark.h>

#include <numeric>

#include "qtree/builder.hpp"
#include "qtree/datagen.hpp"
#include "qtree/sweep.hpp"

using namespace qtree;

namespace {

const ProblemInstance& classifiers() {
    static const auto inst = synthetic_classifier_instance(25, 1.0);
    return inst;
}

template <auto Kernel>
void score_root(benchmark::State& state) {
    const auto& inst = classifiers();
    std::vector<int> objects(inst.num_objects), queries(inst.num_queries);
    std::iota(objects.begin(), objects.end(), 0);
    std::iota(queries.begin(), queries.end(), 0);
    const auto regime = state.range(0) ? LambdaRegime::finite(2) : LambdaRegime::one();
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(inst, objects, queries, regime, Mode::object));
}

template <auto Sweep>
void classifier_sweep(benchmark::State& state) {
    SweepOptions options;
    for (double l : {1.2, 2.0, 5.0, 20.0, 200.0}) options.lambdas.push_back(LambdaRegime::finite(l));
    for (const char* name : {"lambda-gbs", "gbs", "uniform-gbs"}) options.algorithms.push_back(algorithm_by_name(name));
    options.repetitions = static_cast<int>(state.range(0));
    options.seed = 1;
    const InstanceSource source{synthetic_classifier_instance(5, 1.0), std::nullopt};
    for (auto _ : state) benchmark::DoNotOptimize(Sweep(source, options));
}

}  // namespace

BENCHMARK(score_root<score_candidates_serial>)->Arg(0)->Arg(1);
BENCHMARK(score_root<score_candidates_parallel>)->Arg(0)->Arg(1);
BENCHMARK(classifier_sweep<run_sweep_serial>)->Arg(25)->Unit(benchmark::kMillisecond);
BENCHMARK(classifier_sweep<run_sweep>)->Arg(25)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
