// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "hdnn/beamforming.hpp"
#include "hdnn/channel.hpp"
#include "hdnn/cvnn.hpp"
#include "hdnn/numerics.hpp"

#include <benchmark/benchmark.h>

#include <vector>

using namespace hdnn;

namespace {

CMatrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, RngStream& rng) {
  CVector v = complex_gaussian(rows * cols, rng);
  return Eigen::Map<CMatrix>(v.data(), rows, cols);
}

void BM_Svd(benchmark::State& state) {
  RngStream rng(1);
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const CMatrix a = gaussian_matrix(n, n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(svd(a));
}
BENCHMARK(BM_Svd)->Arg(4)->Arg(16)->Arg(64);

void BM_UnitModulusDecomposition(benchmark::State& state) {
  RngStream rng(2);
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const CMatrix a = gaussian_matrix(n, n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(decompose_unit_modulus(a));
}
BENCHMARK(BM_UnitModulusDecomposition)->Arg(16)->Arg(64);

void BM_WaterFill(benchmark::State& state) {
  RngStream rng(3);
  std::vector<double> gains(static_cast<std::size_t>(state.range(0)));
  for (double& g : gains) g = 0.1 + 10.0 * rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(water_fill(gains, 1.0));
}
BENCHMARK(BM_WaterFill)->Arg(4)->Arg(64);

void BM_ChannelGeneration(benchmark::State& state) {
  ChannelParams p;
  p.n_tx = 64;
  p.n_rx = 4;
  RngStream rng(4);
  for (auto _ : state) benchmark::DoNotOptimize(generate_channel(p, rng));
}
BENCHMARK(BM_ChannelGeneration);

// One forward/backward pass over a 256-sample batch through a 16-wide MLP.
void BM_ForwardBackward(benchmark::State& state) {
  RngStream rng(5);
  const cvnn::Network net = cvnn::make_mlp({2, 16, 16, 16}, cvnn::Activation::CPReLU, rng);
  const CMatrix x = gaussian_matrix(2, 256, rng);
  const CMatrix y = gaussian_matrix(16, 256, rng);
  for (auto _ : state) {
    cvnn::ForwardCache cache;
    const CMatrix out = cvnn::forward(net, x, &cache);
    const cvnn::LossAndGrad lg = cvnn::mae_loss(out, y);
    benchmark::DoNotOptimize(cvnn::backward(net, cache, lg.grad));
  }
}
BENCHMARK(BM_ForwardBackward);

}  // namespace

BENCHMARK_MAIN();
