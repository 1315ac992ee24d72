/*
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    https://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/
#include "mdaa/adapter.hpp"
#include "mdaa/analytic_classifier.hpp"
#include "mdaa/expansion.hpp"
#include "mdaa/linalg.hpp"
#include "mdaa/stream.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

namespace {

using namespace mdaa;

Matrix gaussian(std::mt19937_64& rng, Index rows, Index cols) {
    std::normal_distribution<double> normal;
    Matrix m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
    return m;
}

void BM_Factorize(benchmark::State& state) {
    const auto phi = static_cast<Index>(state.range(0));
    std::mt19937_64 rng(1);
    Matrix p = Matrix::Identity(phi, phi);
    rank_k_update_in_place(p, gaussian(rng, 2 * phi, phi));
    for (auto _ : state) {
        SpdFactor f = spd_factorize(p);
        benchmark::DoNotOptimize(f);
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Factorize)->RangeMultiplier(2)->Range(64, 1024)->Complexity(benchmark::oNCubed)->Unit(benchmark::kMillisecond);

// Accumulating one batch into P and Q, without the solve.
void BM_AccumulateBatch(benchmark::State& state) {
    const Index phi = 512;
    const auto rows = static_cast<Index>(state.range(0));
    std::mt19937_64 rng(2);
    AnalyticClassifier ac(Branch::audio, MemoryBank::regularizer_only(phi, 10, 1.0));
    const Matrix x = gaussian(rng, rows, phi);
    const Matrix y = Matrix::Constant(rows, 10, 0.1);
    for (auto _ : state) {
        ac.adapt(x, y);
    }
    state.SetItemsProcessed(state.iterations() * rows);
}
BENCHMARK(BM_AccumulateBatch)->Arg(1)->Arg(16)->Arg(64)->Arg(256);

void BM_Expand(benchmark::State& state) {
    const auto phi = static_cast<std::uint32_t>(state.range(0));
    const Expansion e = Expansion::build({32, phi, 3, Nonlinearity::relu, 1.0 / std::sqrt(32.0)});
    std::mt19937_64 rng(3);
    const Matrix x = gaussian(rng, 64, 32);
    for (auto _ : state) {
        Matrix h = e.expand(x);
        benchmark::DoNotOptimize(h);
    }
    state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_Expand)->Arg(128)->Arg(512)->Arg(2048);

// One full step of the adapter per iteration: three solves, inference and
// gated updates for a 64-sample batch.
void BM_InferAndAdapt(benchmark::State& state) {
    const auto phi = static_cast<std::uint32_t>(state.range(0));
    TaskConfig task;
    const GeneratedTask g = generate_task(task);
    const BranchArray<std::optional<ExpansionSpec>> specs{
        ExpansionSpec{task.audio_dim, phi, 1, Nonlinearity::relu, 1.0 / std::sqrt(32.0)},
        ExpansionSpec{task.video_dim, phi, 2, Nonlinearity::relu, 1.0 / std::sqrt(32.0)},
        ExpansionSpec{task.audio_dim + task.video_dim, phi, 3, Nonlinearity::relu, 1.0 / 8.0}};
    MdaaModel model = MdaaModel::initialize(specs, SourceData{g.source.audio, g.source.video, g.source.labels},
                                            task.num_classes, 1.0, {});
    PhaseSchedule schedule{ScheduleMode::progressive_single_modality,
                           {Phase{"x", CorruptionSpec{Modality::audio, CorruptionKind::additive_gaussian, 2.0}, 64, 64}}};
    Stream stream(g.task, schedule);
    const Batch batch = stream.next()->batch;
    for (auto _ : state) {
        auto events = model.infer_and_adapt(batch);
        benchmark::DoNotOptimize(events);
    }
    state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_InferAndAdapt)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

}// namespace

BENCHMARK_MAIN();
