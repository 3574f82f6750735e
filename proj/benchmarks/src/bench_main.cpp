#include <benchmark/benchmark.h>

#include "painbench/agreement.hpp"
#include "painbench/explain.hpp"
#include "painbench/fixtures.hpp"
#include "painbench/model_zoo.hpp"
#include "painbench/nn.hpp"
#include "painbench/scales.hpp"

using namespace painbench;

static void BM_FacsScore(benchmark::State& state) {
    scales::AUIntensities au{3, 1, 4, 2, 5, 1};
    for (auto _ : state) benchmark::DoNotOptimize(scales::facs_pain_score(au));
}
BENCHMARK(BM_FacsScore);

static void BM_Icc(benchmark::State& state) {
    nn::Rng rng(11);
    agreement::RatingsTable table;
    table.scale_name = "bench";
    table.matrix.resize(static_cast<size_t>(state.range(0)));
    for (auto& row : table.matrix) row = {rng.uniform() * 10, rng.uniform() * 10};
    for (auto _ : state) benchmark::DoNotOptimize(agreement::icc(table));
}
BENCHMARK(BM_Icc)->Arg(20)->Arg(200);

static void BM_TinyCnnForward(benchmark::State& state) {
    zoo::Classifier clf = zoo::build("tiny_cnn");
    nn::Rng rng(3);
    nn::Tensor x(3, clf.spec.input_side, clf.spec.input_side);
    for (int i = 0; i < x.data.size(); ++i) x.data[i] = rng.uniform();
    for (auto _ : state) benchmark::DoNotOptimize(clf.net->forward(x));
}
BENCHMARK(BM_TinyCnnForward);

static void BM_GridSegments(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(explain::grid_segments(224, 224, 50));
}
BENCHMARK(BM_GridSegments);

static void BM_RenderFace(benchmark::State& state) {
    for (auto _ : state) {
        fixtures::GroundTruth truth;
        benchmark::DoNotOptimize(
            fixtures::render_face(96, data::PainClass::PAIN, state.iterations(), &truth));
    }
}
BENCHMARK(BM_RenderFace);

BENCHMARK_MAIN();
