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

#ifndef HDNN_SERIALIZE_HPP
#define HDNN_SERIALIZE_HPP

#include "hdnn/channel.hpp"
#include "hdnn/cvnn.hpp"
#include "hdnn/evalsim.hpp"
#include "hdnn/hdnn.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>

// Structured-text formats. All matrices are stored row-major as arrays of
// [re, im] pairs; doubles use the shortest representation that round-trips
// bit-exactly. No function here touches the filesystem.
namespace hdnn::io {

using json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

json matrix_to_json(const CMatrix& m);                 // {"rows", "cols", "data"}
CMatrix matrix_from_json(const json& j);

json complex_array(const CMatrix& m);                  // row-major [[re, im], ...]
CMatrix complex_array_to_matrix(const json& arr, Eigen::Index rows, Eigen::Index cols);

json phases_to_json(const CMatrix& unit);              // row-major angles, radians
CMatrix phases_from_json(const json& arr, Eigen::Index rows, Eigen::Index cols);

json channel_params_to_json(const ChannelParams& p);
ChannelParams channel_params_from_json(const json& j);

/// {"format", "params", "seed", "h", plus ray provenance}
json channel_to_json(const ChannelRealization& ch);
ChannelRealization channel_from_json(const json& j);

json network_to_json(const cvnn::Network& net);
cvnn::Network network_from_json(const json& j);

json realization_to_json(const AdnnRealization& r);
AdnnRealization realization_from_json(const json& j);

/// Metadata carried alongside a trained model.
struct ModelMeta {
  std::string preset_name;
  json seeds = json::object();     // seed lineage
  json training = json::object();  // config echo, loss trace
  std::string channel_id;
  double design_snr_db = 0.0;
};

json hdnn_to_json(const HdnnModel& m, const ModelMeta& meta, const AdnnRealization* realization);

struct LoadedModel {
  HdnnModel model;
  ModelMeta meta;
  std::optional<AdnnRealization> realization;
};
LoadedModel hdnn_from_json(const json& j);

/// FNV-1a 64 over the canonical (sorted-key, compact) dump, as 16 hex digits.
std::string config_hash(const json& canonical);

/// Fixed column order: channel_id,snr_db,metric,value,stderr. A leading
/// comment line carries the provenance header.
std::string eval_csv(const EvalResult& r, const std::string& header_comment);

std::string dump(const json& j);

}  // namespace hdnn::io

#endif  // HDNN_SERIALIZE_HPP
