//
// Copyright 2026 The Facegate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// OpenMP kernels against their serial reference versions.
//
//   build/bench/facegate_bench --benchmark_filter=Laplacian
#include <random>

#include <benchmark/benchmark.h>

#include "facegate/classifier.hpp"
#include "facegate/imaging.hpp"

namespace {

using namespace facegate;

imaging::GrayImage noise(int side) {
  std::mt19937_64 rng(side);
  std::uniform_int_distribution<int> px(0, 255);
  std::vector<std::uint8_t> v(static_cast<std::size_t>(side) * side);
  for (auto& p : v) p = static_cast<std::uint8_t>(px(rng));
  return imaging::GrayImage(side, side, std::move(v));
}

template <imaging::Measurement (*Kernel)(const imaging::GrayImage&, const imaging::RectRegion&)>
void measure(benchmark::State& state) {
  const auto img = noise(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(img, img.bounds()).value);
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

template <imaging::DifferenceHistogram (*Kernel)(const imaging::GrayImage&, const imaging::RectRegion&)>
void histogram(benchmark::State& state) {
  const auto img = noise(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(img, img.bounds()));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

BENCHMARK(measure<imaging::laplacian_variance>)->Name("Laplacian/parallel")->Arg(64)->Arg(512)->Arg(2048);
BENCHMARK(measure<imaging::reference::laplacian_variance>)->Name("Laplacian/reference")->Arg(64)->Arg(512)->Arg(2048);
BENCHMARK(measure<imaging::contrast>)->Name("Contrast/parallel")->Arg(64)->Arg(512)->Arg(2048);
BENCHMARK(measure<imaging::reference::contrast>)->Name("Contrast/reference")->Arg(64)->Arg(512)->Arg(2048);
BENCHMARK(histogram<imaging::difference_histogram>)->Name("Histogram/parallel")->Arg(64)->Arg(512)->Arg(2048);
BENCHMARK(histogram<imaging::reference::difference_histogram>)
    ->Name("Histogram/reference")
    ->Arg(64)
    ->Arg(512)
    ->Arg(2048);

std::vector<features::FeatureVector> inputs(std::size_t n, std::size_t d) {
  std::mt19937_64 rng(n);
  std::normal_distribution<double> g;
  std::vector<features::FeatureVector> xs(n, features::FeatureVector{std::vector<double>(d)});
  for (auto& x : xs)
    for (double& v : x.values) v = g(rng);
  return xs;
}

void PredictBatch(benchmark::State& state) {
  const auto model = classifier::init_model(features::FeatureMask::kFFFM, {});
  const auto xs = inputs(static_cast<std::size_t>(state.range(0)), 532);
  for (auto _ : state) benchmark::DoNotOptimize(classifier::predict_batch(model, xs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void PredictSerial(benchmark::State& state) {
  const auto model = classifier::init_model(features::FeatureMask::kFFFM, {});
  const auto xs = inputs(static_cast<std::size_t>(state.range(0)), 532);
  for (auto _ : state) {
    for (const auto& x : xs) benchmark::DoNotOptimize(classifier::predict(model, x));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK(PredictBatch)->Arg(256)->Arg(4096);
BENCHMARK(PredictSerial)->Arg(256)->Arg(4096);

}  // namespace

BENCHMARK_MAIN();
