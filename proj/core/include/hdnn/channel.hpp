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

#ifndef HDNN_CHANNEL_HPP
#define HDNN_CHANNEL_HPP

#include "hdnn/numerics.hpp"

#include <cstdint>
#include <vector>

namespace hdnn {

// Clustered narrowband mmWave channel with uniform linear arrays at both
// ends. Defaults are 5 clusters of 10 rays with a 10 degree angular spread.
struct ChannelParams {
  int n_tx = 0;
  int n_rx = 0;
  int n_clusters = 5;
  int n_rays = 10;
  double spread = 10.0 * kPi / 180.0;  // radians, std of the per-ray Laplacian
  std::uint64_t seed = 0;

  void validate() const;
};

/// One propagation path (cluster i, ray j).
struct Ray {
  double angle_tx = 0.0;  // departure, radians in [0, 2pi)
  double angle_rx = 0.0;  // arrival, radians in [0, 2pi)
  cplx gain{1.0, 0.0};
};

struct ChannelRealization {
  CMatrix h;  // n_rx x n_tx
  ChannelParams params;
  std::vector<double> cluster_means_tx;
  std::vector<double> cluster_means_rx;
  std::vector<Ray> rays;  // cluster-major: index = i * n_rays + j
};

/// ULA steering vector with half-wavelength spacing, unit norm.
CVector array_response(double phi, int n);

/// Sum of ray outer products with the sqrt(n_tx n_rx / (Nc Nray)) normalisation.
CMatrix assemble_channel(const ChannelParams& params, const std::vector<Ray>& rays);

ChannelRealization generate_channel(const ChannelParams& params, RngStream& rng);

/// Uses a stream seeded with params.seed.
ChannelRealization generate_channel(const ChannelParams& params);

/// Wraps an angle into [0, 2pi).
double wrap_angle(double a);

}  // namespace hdnn

#endif  // HDNN_CHANNEL_HPP
