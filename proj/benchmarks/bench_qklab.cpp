// Copyright 2026 The qklab authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Microbenchmarks for the hot paths: state embedding, Gram assembly,
// dual training, and the PSD repair step.

#include <cstdint>
#include <vector>

#include <benchmark/benchmark.h>
#include <Eigen/Dense>

#include "qklab/feature_map.hpp"
#include "qklab/kernel.hpp"
#include "qklab/rng.hpp"
#include "qklab/svm.hpp"

namespace {

std::vector<double> random_point(int dimension, std::uint64_t seed) {
    qklab::Rng rng(seed);
    std::vector<double> x(static_cast<std::size_t>(dimension));
    for (auto& v : x) v = rng.normal();
    return x;
}

Eigen::MatrixXd random_inputs(Eigen::Index rows, Eigen::Index cols,
                              std::uint64_t seed) {
    qklab::Rng rng(seed);
    Eigen::MatrixXd X(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            X(i, j) = rng.normal();
    return X;
}

void bm_iqp_embed(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const qklab::IqpFeatureMap map(d, 0.5);
    const std::vector<double> x = random_point(d, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(map.embed(x));
    }
    state.SetItemsProcessed(state.iterations());
}

void bm_hamevo_embed(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const qklab::HamEvoFeatureMap map(d, 0.1, 20, 7);
    const std::vector<double> x = random_point(d, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(map.embed(x));
    }
    state.SetItemsProcessed(state.iterations());
}

void bm_gram(benchmark::State& state) {
    const Eigen::Index n = state.range(0);
    const int threads = static_cast<int>(state.range(1));
    const qklab::IqpFeatureMap map(10, 0.5);
    const Eigen::MatrixXd X = random_inputs(n, 10, 3);
    qklab::GramOptions options;
    options.n_threads = threads;
    for (auto _ : state) {
        benchmark::DoNotOptimize(qklab::gram(map, X, options));
    }
    state.SetItemsProcessed(state.iterations() * n * (n + 1) / 2);
}

void bm_train_svc(benchmark::State& state) {
    const Eigen::Index n = state.range(0);
    const Eigen::MatrixXd A = random_inputs(n, n, 4);
    Eigen::MatrixXd K = A * A.transpose();
    const Eigen::VectorXd scale = K.diagonal().cwiseSqrt();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            K(i, j) /= scale(i) * scale(j);
    qklab::Rng rng(5);
    std::vector<int> y(static_cast<std::size_t>(n));
    for (auto& label : y) label = rng.uniform() < 0.5 ? -1 : 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(qklab::train_svc({K, y}, 1.0));
    }
    state.SetItemsProcessed(state.iterations());
}

void bm_nearest_psd(benchmark::State& state) {
    const Eigen::Index n = state.range(0);
    const qklab::IqpFeatureMap map(8, 0.5);
    const Eigen::MatrixXd X = random_inputs(n, 8, 6);
    const Eigen::MatrixXd noisy =
        qklab::inject_noise(qklab::gram(map, X), 0.01, 9);
    for (auto _ : state) {
        benchmark::DoNotOptimize(qklab::nearest_psd(noisy));
    }
    state.SetItemsProcessed(state.iterations());
}

} // namespace

BENCHMARK(bm_iqp_embed)->Arg(8)->Arg(12)->Arg(16);
BENCHMARK(bm_hamevo_embed)->Arg(8)->Arg(12)->Arg(16);
BENCHMARK(bm_gram)->Args({32, 1})->Args({64, 1})->Args({64, 4});
BENCHMARK(bm_train_svc)->Arg(64)->Arg(128);
BENCHMARK(bm_nearest_psd)->Arg(100)->Arg(200);

BENCHMARK_MAIN();
