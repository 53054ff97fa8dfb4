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

#include "hdnn/trainer.hpp"

#include "hdnn/error.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

namespace hdnn {

void TrainConfig::validate() const {
  if (n_samples < 1) throw Error(ErrorCode::InvalidArgument, "TrainConfig: n_samples must be >= 1");
  if (batch_size < 1) throw Error(ErrorCode::InvalidArgument, "TrainConfig: batch_size must be >= 1");
  if (batch_size > n_samples) throw Error(ErrorCode::InvalidArgument, "TrainConfig: batch_size exceeds n_samples");
  if (epochs < 1) throw Error(ErrorCode::InvalidArgument, "TrainConfig: epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "TrainConfig: learning_rate must be > 0");
}

cplx qam4_map(int b0, int b1) {
  const double s = 1.0 / std::sqrt(2.0);
  return {s * (1 - 2 * (b0 & 1)), s * (1 - 2 * (b1 & 1))};
}

CMatrix random_qam4(Eigen::Index n_s, Eigen::Index count, RngStream& rng) {
  CMatrix s(n_s, count);
  for (Eigen::Index j = 0; j < count; ++j) {
    for (Eigen::Index i = 0; i < n_s; ++i) {
      const std::uint64_t bits = rng.next_u64() >> 62;
      s(i, j) = qam4_map(static_cast<int>(bits >> 1), static_cast<int>(bits & 1));
    }
  }
  return s;
}

Dataset make_downlink_dataset(const CMatrix& p, std::int64_t n, RngStream& rng) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "make_downlink_dataset: n must be >= 1");
  Dataset d;
  d.seed = rng.seed();
  d.direction = Direction::Downlink;
  d.inputs = random_qam4(p.cols(), n, rng);
  d.targets = p * d.inputs;
  return d;
}

Dataset make_uplink_dataset(const CMatrix& c, double rho, std::int64_t n, RngStream& rng) {
  if (!(rho > 0.0)) throw Error(ErrorCode::InvalidArgument, "make_uplink_dataset: rho must be > 0");
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "make_uplink_dataset: n must be >= 1");
  Dataset d;
  d.seed = rng.seed();
  d.direction = Direction::Uplink;
  const Eigen::Index n_rx = c.cols();
  d.inputs.resize(n_rx, n);
  for (std::int64_t j = 0; j < n; ++j) {
    const CVector z = complex_gaussian(n_rx, rng);
    const CVector w = complex_gaussian(n_rx, rng);
    d.inputs.col(j) = rho * z + w;
  }
  d.targets = c * d.inputs;
  return d;
}

TrainResult train(const HdnnModel& model, const Dataset& data, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  model.validate();
  if (data.inputs.cols() != data.targets.cols())
    throw Error(ErrorCode::DimensionMismatch, "train: inputs and targets differ in count");
  if (data.inputs.rows() != model.input_dim() || data.targets.rows() != model.output_dim())
    throw Error(ErrorCode::DimensionMismatch, "train: dataset dims do not match the model direction");

  const std::int64_t available = std::min<std::int64_t>(cfg.n_samples, data.size());
  if (cfg.batch_size > available) throw Error(ErrorCode::InvalidArgument, "train: batch larger than dataset");
  // A trailing partial batch is dropped.
  const std::int64_t n_batches = available / cfg.batch_size;

  cvnn::Network net = joined_network(model);
  cvnn::AdamState adam = cvnn::AdamState::for_network(net, {cfg.learning_rate, 0.9, 0.999, 1e-8});

  std::vector<Eigen::Index> order(static_cast<std::size_t>(available));
  CMatrix xb(data.inputs.rows(), cfg.batch_size);
  CMatrix yb(data.targets.rows(), cfg.batch_size);
  cvnn::ForwardCache cache;

  TrainResult result;
  const RngStream shuffle_root(cfg.seed);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    RngStream shuffle = shuffle_root.split(static_cast<std::uint64_t>(epoch));
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(shuffle.below(i));
      std::swap(order[i - 1], order[j]);
    }

    double loss_sum = 0.0;
    for (std::int64_t b = 0; b < n_batches; ++b) {
      for (std::int64_t k = 0; k < cfg.batch_size; ++k) {
        const Eigen::Index src = order[static_cast<std::size_t>(b * cfg.batch_size + k)];
        xb.col(k) = data.inputs.col(src);
        yb.col(k) = data.targets.col(src);
      }
      const CMatrix out = cvnn::forward(net, xb, &cache);
      const cvnn::LossAndGrad lg = cvnn::mae_loss(out, yb);
      if (!std::isfinite(lg.loss))
        throw Error(ErrorCode::DivergenceDetected,
                    "loss became non-finite at epoch " + std::to_string(epoch) + ", batch " + std::to_string(b));
      loss_sum += lg.loss;
      const cvnn::Gradients g = cvnn::backward(net, cache, lg.grad);
      cvnn::adam_step(net, g, adam);
    }
    const double mean_loss = loss_sum / static_cast<double>(n_batches);
    result.epoch_loss.push_back(mean_loss);
    result.epoch_seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    if (on_epoch) on_epoch(epoch, mean_loss);
  }

  result.model = model;
  assign_joined(result.model, net);
  result.model.trained = true;
  result.final_loss = result.epoch_loss.back();
  return result;
}

}  // namespace hdnn
