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

#include "hdnn/hdnn.hpp"

#include "hdnn/error.hpp"

#include <cmath>

namespace hdnn {

std::string_view to_string(Direction d) { return d == Direction::Downlink ? "downlink" : "uplink"; }

std::string_view to_string(Preset p) { return p == Preset::Standard ? "standard" : "half_rf"; }

Direction direction_from_string(std::string_view s) {
  if (s == "downlink") return Direction::Downlink;
  if (s == "uplink") return Direction::Uplink;
  throw Error(ErrorCode::InvalidArgument, "unknown direction '" + std::string(s) + "'");
}

Preset preset_from_string(std::string_view s) {
  if (s == "standard") return Preset::Standard;
  if (s == "half_rf") return Preset::HalfRf;
  throw Error(ErrorCode::InvalidPreset, "unknown preset '" + std::string(s) + "'");
}

PresetShape PresetShape::of(Preset p) {
  if (p == Preset::Standard) return {5, 2, 1, 3};
  return {4, 2, 4, 6};
}

Eigen::Index HdnnModel::input_dim() const {
  return direction == Direction::Downlink ? digital.input_dim() : analog.input_dim();
}

Eigen::Index HdnnModel::output_dim() const {
  return direction == Direction::Downlink ? analog.output_dim() : digital.output_dim();
}

void HdnnModel::validate() const {
  digital.validate();
  analog.validate();
  if (direction == Direction::Downlink) {
    if (digital.output_dim() != n_rf || analog.input_dim() != n_rf)
      throw Error(ErrorCode::DimensionMismatch, "downlink HDNN: RF boundary width mismatch");
    if (digital.input_dim() != n_s || analog.output_dim() != n_antennas)
      throw Error(ErrorCode::DimensionMismatch, "downlink HDNN: expected n_s -> ... -> n_tx");
  } else {
    if (analog.output_dim() != n_rf || digital.input_dim() != n_rf)
      throw Error(ErrorCode::DimensionMismatch, "uplink HDNN: RF boundary width mismatch");
    if (analog.input_dim() != n_antennas || digital.output_dim() != n_s)
      throw Error(ErrorCode::DimensionMismatch, "uplink HDNN: expected n_rx -> ... -> n_s");
  }
}

namespace {

std::vector<int> stack(int in, int hidden_width, int hidden_layers, int out) {
  std::vector<int> w{in};
  for (int i = 0; i < hidden_layers; ++i) w.push_back(hidden_width);
  w.push_back(out);
  return w;
}

}  // namespace

HdnnModel build_hdnn(Preset preset, Direction direction, int n_antennas, int n_s, int n_rf, RngStream& rng,
                     const HdnnOptions& opts) {
  if (n_antennas < 1 || n_s < 1) throw Error(ErrorCode::InvalidArgument, "build_hdnn: dims must be >= 1");
  if (n_s > n_antennas) throw Error(ErrorCode::InvalidArgument, "build_hdnn: n_s exceeds antenna count");

  if (preset == Preset::HalfRf) {
    if (direction == Direction::Uplink)
      throw Error(ErrorCode::InvalidPreset, "half_rf preset is only defined for the downlink");
    if (n_s % 2 != 0)
      throw Error(ErrorCode::OddStreams, "half_rf preset needs an even stream count, got n_s=" + std::to_string(n_s));
    if (n_rf != 0 && n_rf != n_s / 2)
      throw Error(ErrorCode::InvalidPreset, "half_rf preset fixes n_rf = n_s/2");
    n_rf = n_s / 2;
  } else {
    if (n_rf == 0) n_rf = n_s;
    if (n_rf < n_s) throw Error(ErrorCode::InvalidPreset, "standard preset requires n_rf >= n_s");
  }

  const PresetShape shape = PresetShape::of(preset);
  HdnnModel m;
  m.n_rf = n_rf;
  m.n_s = n_s;
  m.n_antennas = n_antennas;
  m.direction = direction;
  m.preset = preset;

  // Initialise in signal order so the seed lineage reads naturally.
  if (direction == Direction::Downlink) {
    m.digital = cvnn::make_mlp(
        stack(n_s, shape.digital_width_factor * n_s, shape.digital_hidden_layers, n_rf), opts.digital_hidden, rng);
    m.analog = cvnn::make_mlp(
        stack(n_rf, shape.analog_width_factor * n_antennas, shape.analog_hidden_layers, n_antennas),
        opts.analog_hidden, rng);
  } else {
    m.analog = cvnn::make_mlp(
        stack(n_antennas, shape.analog_width_factor * n_antennas, shape.analog_hidden_layers, n_rf),
        opts.analog_hidden, rng);
    m.digital = cvnn::make_mlp(
        stack(n_rf, shape.digital_width_factor * n_s, shape.digital_hidden_layers, n_s), opts.digital_hidden, rng);
  }
  m.validate();
  return m;
}

cvnn::Network joined_network(const HdnnModel& model) {
  return model.direction == Direction::Downlink ? cvnn::concat(model.digital, model.analog)
                                                : cvnn::concat(model.analog, model.digital);
}

void assign_joined(HdnnModel& model, const cvnn::Network& joined) {
  const cvnn::Network& first = model.direction == Direction::Downlink ? model.digital : model.analog;
  const std::size_t n_first = first.layers.size();
  const std::size_t n_total = model.digital.layers.size() + model.analog.layers.size();
  if (joined.layers.size() != n_total) throw Error(ErrorCode::DimensionMismatch, "assign_joined: layer count");
  cvnn::Network a, b;
  a.layers.assign(joined.layers.begin(), joined.layers.begin() + static_cast<std::ptrdiff_t>(n_first));
  b.layers.assign(joined.layers.begin() + static_cast<std::ptrdiff_t>(n_first), joined.layers.end());
  if (model.direction == Direction::Downlink) {
    model.digital = std::move(a);
    model.analog = std::move(b);
  } else {
    model.analog = std::move(a);
    model.digital = std::move(b);
  }
  model.validate();
}

CMatrix hdnn_forward(const HdnnModel& model, const CMatrix& batch) {
  if (batch.rows() != model.input_dim())
    throw Error(ErrorCode::DimensionMismatch, "hdnn_forward: input length " + std::to_string(batch.rows()) +
                                                  " != " + std::to_string(model.input_dim()));
  if (model.direction == Direction::Downlink) return cvnn::forward(model.analog, cvnn::forward(model.digital, batch));
  return cvnn::forward(model.digital, cvnn::forward(model.analog, batch));
}

CVector hdnn_forward(const HdnnModel& model, const CVector& s) {
  return hdnn_forward(model, CMatrix(s)).col(0);
}

Eigen::Index AdnnRealization::input_dim() const {
  return layers.empty() ? 0 : layers.front().decomposition.r1.cols() - 1;
}

Eigen::Index AdnnRealization::output_dim() const {
  return layers.empty() ? 0 : layers.back().decomposition.r1.rows();
}

double AdnnRealization::recompute_cumulative_scale() const {
  double s = 1.0;
  for (const AdnnLayer& l : layers) s *= 1.0 / (2.0 * l.decomposition.c);
  return s;
}

AdnnRealization realize_adnn(const cvnn::Network& analog) {
  analog.validate();
  AdnnRealization out;
  double upstream = 1.0;
  for (const cvnn::Layer& l : analog.layers) {
    CMatrix aug(l.out_dim(), l.in_dim() + 1);
    aug.leftCols(l.in_dim()) = l.weight;
    aug.col(l.in_dim()) = l.bias;
    AdnnLayer al;
    al.decomposition = decompose_unit_modulus(aug);
    al.scale = 1.0 / (2.0 * al.decomposition.c);
    al.bias_feed = upstream;
    al.activation = l.activation;
    al.slope = l.slope;
    upstream *= al.scale;
    out.layers.push_back(std::move(al));
  }
  out.cumulative_scale = out.recompute_cumulative_scale();
  return out;
}

CMatrix adnn_forward(const AdnnRealization& real, const CMatrix& x_rf) {
  if (real.layers.empty()) throw Error(ErrorCode::InvalidArgument, "adnn_forward: empty realisation");
  if (x_rf.rows() != real.input_dim())
    throw Error(ErrorCode::DimensionMismatch, "adnn_forward: input length " + std::to_string(x_rf.rows()) +
                                                  " != " + std::to_string(real.input_dim()));
  const double split = 1.0 / std::sqrt(2.0);
  CMatrix a = x_rf;
  for (const AdnnLayer& l : real.layers) {
    const Eigen::Index n_in = l.decomposition.r1.cols() - 1;
    if (a.rows() != n_in) throw Error(ErrorCode::DimensionMismatch, "adnn_forward: layer chaining");
    CMatrix xa(n_in + 1, a.cols());
    xa.topRows(n_in) = a;
    xa.row(n_in).setConstant(cplx(l.bias_feed, 0.0));
    // Divider feeds each branch with xa/sqrt2, combiner adds a further 1/sqrt2.
    const CMatrix branch = split * xa;
    CMatrix z = split * (l.decomposition.r1 * branch + l.decomposition.r2 * branch);
    cvnn::apply_activation(z, l.activation, l.slope);
    a = std::move(z);
  }
  return a;
}

CVector adnn_forward(const AdnnRealization& real, const CVector& x_rf) {
  return adnn_forward(real, CMatrix(x_rf)).col(0);
}

CMatrix realized_hdnn_forward(const HdnnModel& model, const AdnnRealization& real, const CMatrix& batch) {
  if (batch.rows() != model.input_dim()) throw Error(ErrorCode::DimensionMismatch, "realized_hdnn_forward: input");
  const double comp = 1.0 / real.cumulative_scale;
  if (model.direction == Direction::Downlink) {
    return comp * adnn_forward(real, cvnn::forward(model.digital, batch));
  }
  return cvnn::forward(model.digital, CMatrix(comp * adnn_forward(real, batch)));
}

}  // namespace hdnn
