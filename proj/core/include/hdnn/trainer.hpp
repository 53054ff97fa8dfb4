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

#ifndef HDNN_TRAINER_HPP
#define HDNN_TRAINER_HPP

#include "hdnn/beamforming.hpp"
#include "hdnn/hdnn.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace hdnn {

struct TrainConfig {
  std::int64_t n_samples = 500000;
  std::int64_t batch_size = 50;
  int epochs = 5;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;  // drives per-epoch shuffling

  void validate() const;
};

struct Dataset {
  CMatrix inputs;   // dim_in x N
  CMatrix targets;  // dim_out x N
  std::string channel_id;
  std::uint64_t seed = 0;
  Direction direction = Direction::Downlink;

  Eigen::Index size() const { return inputs.cols(); }
};

/// Gray-mapped 4-QAM symbol for the bit pair (b0, b1): ((1-2b0) + j(1-2b1))/sqrt2.
cplx qam4_map(int b0, int b1);

/// Uniform random 4-QAM vectors, one per column.
CMatrix random_qam4(Eigen::Index n_s, Eigen::Index count, RngStream& rng);

/// Pairs (s, P s) with s uniform 4-QAM.
Dataset make_downlink_dataset(const CMatrix& p, std::int64_t n, RngStream& rng);

/// Pairs (y, C y) with y = rho z + n, z and n i.i.d. CN(0, I).
Dataset make_uplink_dataset(const CMatrix& c, double rho, std::int64_t n, RngStream& rng);

struct TrainResult {
  HdnnModel model;
  std::vector<double> epoch_loss;  // mean mini-batch MAE per epoch
  std::vector<double> epoch_seconds;
  double final_loss = 0.0;
};

using EpochCallback = std::function<void(int epoch, double loss)>;

/// Mini-batch Adam on the MAE loss over the joint digital + analog parameters.
/// Throws DivergenceDetected if the loss becomes non-finite.
TrainResult train(const HdnnModel& model, const Dataset& data, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

}  // namespace hdnn

#endif  // HDNN_TRAINER_HPP
