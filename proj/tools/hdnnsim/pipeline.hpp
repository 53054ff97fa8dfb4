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

#ifndef HDNNSIM_PIPELINE_HPP
#define HDNNSIM_PIPELINE_HPP

#include "hdnn/channel.hpp"
#include "hdnn/evalsim.hpp"
#include "hdnn/hdnn.hpp"
#include "hdnn/serialize.hpp"
#include "hdnn/trainer.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

// Experiment orchestration shared by the command-line tool and the acceptance
// runner. Nothing here touches the filesystem; callers own all I/O.
namespace hdnnsim {

using hdnn::io::json;

/// Channel files are stored in downlink orientation (n_ue x n_bs). The uplink
/// uses the reciprocal channel H^T (n_bs x n_ue).
hdnn::CMatrix link_channel(const hdnn::CMatrix& h_downlink, hdnn::Direction d);

/// Seed for channel `index` of a batch drawn from `master`.
std::uint64_t channel_seed(std::uint64_t master, int index);

struct TrainSettings {
  hdnn::Preset preset = hdnn::Preset::Standard;
  hdnn::Direction direction = hdnn::Direction::Downlink;
  int n_s = 2;
  int n_rf = 0;                // 0: preset default
  double design_snr_db = 0.0;  // water-filling SNR (downlink) or dataset rho (uplink)
  hdnn::TrainConfig train;     // train.seed is overwritten from `seed`
  std::uint64_t seed = 0;      // master; split into init, data and shuffle streams

  json to_json() const;
};

struct TrainedModel {
  hdnn::TrainResult result;
  hdnn::AdnnRealization realization;
  hdnn::io::ModelMeta meta;
  std::string config_hash;
  double train_nmse_db = 0.0;  // against the target map on fresh probes

  json document() const;  // full model file contents
};

/// Builds the target map for `ch`, trains an HDNN on it and realises the analog
/// network. `channel_id` is recorded in the model metadata.
TrainedModel train_on_channel(const hdnn::ChannelRealization& ch, const std::string& channel_id,
                              const TrainSettings& s, const hdnn::EpochCallback& on_epoch = {});

/// The linear map an HDNN of this direction imitates: P (downlink) or C (uplink).
hdnn::CMatrix target_map(const hdnn::CMatrix& h_link, hdnn::Direction d, int n_s, double design_snr_db);

struct EvalSettings {
  hdnn::Direction direction = hdnn::Direction::Downlink;
  int n_s = 2;
  std::vector<double> snr_db;
  std::int64_t min_bits = 200000;        // per SNR point and scheme
  std::int64_t n_probe = 10000;          // SE fit and power normalisation
  std::uint64_t seed = 0;
  std::optional<double> design_snr_db;   // fixed FD design; unset re-water-fills per point
  bool use_realization = true;           // simulate the phase-shifter network if present
  int threads = 1;
  int channel_id = 0;

  json to_json() const;
};

/// BER of the FD reference and, when `model` is given, the HDNN under common
/// random numbers. Metrics: ber_fd, ber_hdnn. Results do not depend on
/// `threads`.
hdnn::EvalResult eval_ber(const hdnn::CMatrix& h_downlink, const hdnn::io::LoadedModel* model,
                          const EvalSettings& s);

/// Spectral efficiency. Metrics: se_fd (the FD design at its fixed SNR, or
/// re-water-filled when no design SNR is set), se_fd_opt (re-water-filled),
/// se_hdnn_lin (effective-linear-map convention) and fit_residual.
hdnn::EvalResult eval_se(const hdnn::CMatrix& h_downlink, const hdnn::io::LoadedModel* model,
                         const EvalSettings& s);

/// Values of `metric` in record order, with their SNRs.
std::vector<double> column(const hdnn::EvalResult& r, const std::string& metric, std::vector<double>* snr = nullptr);

/// Summary document written next to an evaluation CSV.
json eval_summary(const hdnn::EvalResult& r, const json& config, const std::string& config_hash);

}  // namespace hdnnsim

#endif  // HDNNSIM_PIPELINE_HPP
