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

#include "hdnn/serialize.hpp"

#include "hdnn/error.hpp"

#include <cinttypes>
#include <cstdio>
#include <charconv>
#include <cstdlib>
#include <sstream>

namespace hdnn::io {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad(std::string("missing field '") + key + "'");
  return j.at(key);
}

template <typename T>
T get(const json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const json::exception& e) {
    bad(std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

json complex_array(const CMatrix& m) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index k = 0; k < m.cols(); ++k) arr.push_back({m(i, k).real(), m(i, k).imag()});
  return arr;
}

CMatrix complex_array_to_matrix(const json& arr, Eigen::Index rows, Eigen::Index cols) {
  if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != rows * cols)
    bad("complex array has " + std::to_string(arr.is_array() ? arr.size() : 0) + " entries, expected " +
        std::to_string(rows * cols));
  CMatrix m(rows, cols);
  std::size_t idx = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index k = 0; k < cols; ++k, ++idx) {
      const json& e = arr[idx];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) bad("complex entry must be [re, im]");
      m(i, k) = cplx(e[0].get<double>(), e[1].get<double>());
    }
  }
  return m;
}

json matrix_to_json(const CMatrix& m) {
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", complex_array(m)}};
}

CMatrix matrix_from_json(const json& j) {
  const auto rows = get<Eigen::Index>(j, "rows");
  const auto cols = get<Eigen::Index>(j, "cols");
  if (rows < 1 || cols < 1) bad("matrix dims must be >= 1");
  return complex_array_to_matrix(field(j, "data"), rows, cols);
}

json phases_to_json(const CMatrix& unit) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < unit.rows(); ++i)
    for (Eigen::Index k = 0; k < unit.cols(); ++k) arr.push_back(std::arg(unit(i, k)));
  return arr;
}

CMatrix phases_from_json(const json& arr, Eigen::Index rows, Eigen::Index cols) {
  if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != rows * cols) bad("phase array size mismatch");
  CMatrix m(rows, cols);
  std::size_t idx = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = std::polar(1.0, arr[idx++].get<double>());
  return m;
}

json channel_params_to_json(const ChannelParams& p) {
  return json{{"n_tx", p.n_tx},           {"n_rx", p.n_rx},     {"n_clusters", p.n_clusters},
              {"n_rays", p.n_rays},       {"spread", p.spread}, {"seed", p.seed}};
}

ChannelParams channel_params_from_json(const json& j) {
  ChannelParams p;
  p.n_tx = get<int>(j, "n_tx");
  p.n_rx = get<int>(j, "n_rx");
  p.n_clusters = get<int>(j, "n_clusters");
  p.n_rays = get<int>(j, "n_rays");
  p.spread = get<double>(j, "spread");
  p.seed = get<std::uint64_t>(j, "seed");
  try {
    p.validate();
  } catch (const Error& e) {
    bad(e.what());
  }
  return p;
}

json channel_to_json(const ChannelRealization& ch) {
  json rays = json::array();
  for (const Ray& r : ch.rays) rays.push_back({r.angle_tx, r.angle_rx, r.gain.real(), r.gain.imag()});
  return json{{"format", "hdnn.channel"},
              {"version", kFormatVersion},
              {"params", channel_params_to_json(ch.params)},
              {"seed", ch.params.seed},
              {"cluster_means_tx", ch.cluster_means_tx},
              {"cluster_means_rx", ch.cluster_means_rx},
              {"rays", rays},
              {"h", complex_array(ch.h)}};
}

ChannelRealization channel_from_json(const json& j) {
  ChannelRealization ch;
  ch.params = channel_params_from_json(field(j, "params"));
  ch.params.seed = get<std::uint64_t>(j, "seed");
  ch.h = complex_array_to_matrix(field(j, "h"), ch.params.n_rx, ch.params.n_tx);
  if (j.contains("cluster_means_tx")) ch.cluster_means_tx = j.at("cluster_means_tx").get<std::vector<double>>();
  if (j.contains("cluster_means_rx")) ch.cluster_means_rx = j.at("cluster_means_rx").get<std::vector<double>>();
  if (j.contains("rays")) {
    for (const json& r : j.at("rays")) {
      if (!r.is_array() || r.size() != 4) bad("ray entry must be [angle_tx, angle_rx, re, im]");
      ch.rays.push_back({r[0].get<double>(), r[1].get<double>(), cplx(r[2].get<double>(), r[3].get<double>())});
    }
  }
  return ch;
}

json network_to_json(const cvnn::Network& net) {
  json layers = json::array();
  for (const cvnn::Layer& l : net.layers) {
    json lj{{"in_dim", l.in_dim()},
            {"out_dim", l.out_dim()},
            {"activation", std::string(cvnn::to_string(l.activation))},
            {"weight", complex_array(l.weight)},
            {"bias", complex_array(l.bias)}};
    if (l.activation == cvnn::Activation::CPReLU) lj["slope"] = l.slope;
    layers.push_back(std::move(lj));
  }
  return json{{"layers", layers}};
}

cvnn::Network network_from_json(const json& j) {
  cvnn::Network net;
  const json& layers = field(j, "layers");
  if (!layers.is_array() || layers.empty()) bad("network needs a non-empty 'layers' array");
  for (const json& lj : layers) {
    cvnn::Layer l;
    const auto in = get<Eigen::Index>(lj, "in_dim");
    const auto out = get<Eigen::Index>(lj, "out_dim");
    if (in < 1 || out < 1) bad("layer dims must be >= 1");
    try {
      l.activation = cvnn::activation_from_string(get<std::string>(lj, "activation"));
    } catch (const Error& e) {
      bad(e.what());
    }
    l.weight = complex_array_to_matrix(field(lj, "weight"), out, in);
    l.bias = complex_array_to_matrix(field(lj, "bias"), out, 1).col(0);
    if (l.activation == cvnn::Activation::CPReLU) l.slope = get<double>(lj, "slope");
    net.layers.push_back(std::move(l));
  }
  try {
    net.validate();
  } catch (const Error& e) {
    bad(e.what());
  }
  return net;
}

json realization_to_json(const AdnnRealization& r) {
  json layers = json::array();
  for (const AdnnLayer& l : r.layers) {
    json lj{{"rows", l.decomposition.r1.rows()},
            {"cols", l.decomposition.r1.cols()},
            {"c", l.decomposition.c},
            {"scale", l.scale},
            {"bias_feed", l.bias_feed},
            {"activation", std::string(cvnn::to_string(l.activation))},
            {"phases_r1", phases_to_json(l.decomposition.r1)},
            {"phases_r2", phases_to_json(l.decomposition.r2)}};
    if (l.activation == cvnn::Activation::CPReLU) lj["slope"] = l.slope;
    layers.push_back(std::move(lj));
  }
  return json{{"layers", layers}, {"cumulative_scale", r.cumulative_scale}};
}

AdnnRealization realization_from_json(const json& j) {
  AdnnRealization r;
  for (const json& lj : field(j, "layers")) {
    AdnnLayer l;
    const auto rows = get<Eigen::Index>(lj, "rows");
    const auto cols = get<Eigen::Index>(lj, "cols");
    l.decomposition.c = get<double>(lj, "c");
    l.decomposition.r1 = phases_from_json(field(lj, "phases_r1"), rows, cols);
    l.decomposition.r2 = phases_from_json(field(lj, "phases_r2"), rows, cols);
    l.scale = get<double>(lj, "scale");
    l.bias_feed = get<double>(lj, "bias_feed");
    l.activation = cvnn::activation_from_string(get<std::string>(lj, "activation"));
    if (l.activation == cvnn::Activation::CPReLU) l.slope = get<double>(lj, "slope");
    r.layers.push_back(std::move(l));
  }
  r.cumulative_scale = get<double>(j, "cumulative_scale");
  return r;
}

json hdnn_to_json(const HdnnModel& m, const ModelMeta& meta, const AdnnRealization* realization) {
  json j{{"format", "hdnn.model"},
         {"version", kFormatVersion},
         {"preset", std::string(to_string(m.preset))},
         {"preset_name", meta.preset_name.empty() ? std::string(to_string(m.preset)) : meta.preset_name},
         {"direction", std::string(to_string(m.direction))},
         {"n_rf", m.n_rf},
         {"n_s", m.n_s},
         {"n_antennas", m.n_antennas},
         {"trained", m.trained},
         {"channel_id", meta.channel_id},
         {"design_snr_db", meta.design_snr_db},
         {"seeds", meta.seeds},
         {"training", meta.training},
         {"digital", network_to_json(m.digital)},
         {"analog", network_to_json(m.analog)}};
  if (realization) j["realization"] = realization_to_json(*realization);
  return j;
}

LoadedModel hdnn_from_json(const json& j) {
  if (!j.is_object() || j.value("format", "") != "hdnn.model") bad("not an hdnn.model file");
  LoadedModel out;
  HdnnModel& m = out.model;
  try {
    m.preset = preset_from_string(get<std::string>(j, "preset"));
    m.direction = direction_from_string(get<std::string>(j, "direction"));
  } catch (const Error& e) {
    bad(e.what());
  }
  m.n_rf = get<int>(j, "n_rf");
  m.n_s = get<int>(j, "n_s");
  m.n_antennas = get<int>(j, "n_antennas");
  m.trained = get<bool>(j, "trained");
  m.digital = network_from_json(field(j, "digital"));
  m.analog = network_from_json(field(j, "analog"));
  try {
    m.validate();
  } catch (const Error& e) {
    bad(e.what());
  }
  out.meta.preset_name = j.value("preset_name", std::string(to_string(m.preset)));
  out.meta.channel_id = j.value("channel_id", "");
  out.meta.design_snr_db = j.value("design_snr_db", 0.0);
  out.meta.seeds = j.value("seeds", json::object());
  out.meta.training = j.value("training", json::object());
  if (j.contains("realization")) out.realization = realization_from_json(j.at("realization"));
  return out;
}

std::string config_hash(const json& canonical) {
  const std::string s = canonical.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

namespace {

// Shortest %g form that parses back to the same double.
std::string shortest(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string eval_csv(const EvalResult& r, const std::string& header_comment) {
  std::ostringstream os;
  if (!header_comment.empty()) os << "# " << header_comment << '\n';
  os << "channel_id,snr_db,metric,value,stderr\n";
  for (const EvalRecord& rec : r.records) {
    os << rec.channel_id << ',' << shortest(rec.snr_db) << ',' << rec.metric << ',' << shortest(rec.value) << ','
       << shortest(rec.std_error) << '\n';
  }
  return os.str();
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace hdnn::io
