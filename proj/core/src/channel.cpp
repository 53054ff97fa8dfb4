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

#include "hdnn/channel.hpp"

#include "hdnn/error.hpp"

#include <cmath>
#include <string>

namespace hdnn {

void ChannelParams::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::InvalidArgument, std::string("ChannelParams: ") + what);
  };
  need(n_tx >= 1, "n_tx must be >= 1");
  need(n_rx >= 1, "n_rx must be >= 1");
  need(n_clusters >= 1, "n_clusters must be >= 1");
  need(n_rays >= 1, "n_rays must be >= 1");
  need(spread > 0.0 && std::isfinite(spread), "spread must be > 0");
}

double wrap_angle(double a) {
  const double two_pi = 2.0 * kPi;
  double r = std::fmod(a, two_pi);
  if (r < 0.0) r += two_pi;
  if (r >= two_pi) r = 0.0;
  return r;
}

CVector array_response(double phi, int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "array_response: n must be >= 1");
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  const double step = kPi * std::sin(phi);
  CVector a(n);
  for (int k = 0; k < n; ++k) a(k) = scale * std::polar(1.0, step * k);
  return a;
}

CMatrix assemble_channel(const ChannelParams& params, const std::vector<Ray>& rays) {
  params.validate();
  const auto paths = static_cast<std::size_t>(params.n_clusters) * static_cast<std::size_t>(params.n_rays);
  if (rays.size() != paths) {
    throw Error(ErrorCode::DimensionMismatch, "assemble_channel: expected " + std::to_string(paths) +
                                                  " rays, got " + std::to_string(rays.size()));
  }
  CMatrix h = CMatrix::Zero(params.n_rx, params.n_tx);
  for (const Ray& r : rays) {
    h.noalias() += r.gain * array_response(r.angle_rx, params.n_rx) *
                   array_response(r.angle_tx, params.n_tx).adjoint();
  }
  h *= std::sqrt(static_cast<double>(params.n_tx) * params.n_rx / static_cast<double>(paths));
  return h;
}

ChannelRealization generate_channel(const ChannelParams& params, RngStream& rng) {
  params.validate();
  ChannelRealization out;
  out.params = params;
  out.cluster_means_tx.reserve(static_cast<std::size_t>(params.n_clusters));
  out.cluster_means_rx.reserve(static_cast<std::size_t>(params.n_clusters));
  out.rays.reserve(static_cast<std::size_t>(params.n_clusters * params.n_rays));

  for (int i = 0; i < params.n_clusters; ++i) {
    const double mean_tx = 2.0 * kPi * rng.uniform();
    const double mean_rx = 2.0 * kPi * rng.uniform();
    out.cluster_means_tx.push_back(mean_tx);
    out.cluster_means_rx.push_back(mean_rx);
    for (int j = 0; j < params.n_rays; ++j) {
      Ray r;
      r.angle_tx = wrap_angle(laplacian_angle(mean_tx, params.spread, rng));
      r.angle_rx = wrap_angle(laplacian_angle(mean_rx, params.spread, rng));
      r.gain = complex_gaussian(1, rng)(0);
      out.rays.push_back(r);
    }
  }
  out.h = assemble_channel(params, out.rays);
  return out;
}

ChannelRealization generate_channel(const ChannelParams& params) {
  RngStream rng(params.seed);
  return generate_channel(params, rng);
}

}  // namespace hdnn
