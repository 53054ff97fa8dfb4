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

#ifndef HDNN_HDNN_HPP
#define HDNN_HDNN_HPP

#include "hdnn/beamforming.hpp"
#include "hdnn/cvnn.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace hdnn {

enum class Direction { Downlink, Uplink };
enum class Preset { Standard, HalfRf };

std::string_view to_string(Direction d);
std::string_view to_string(Preset p);
Direction direction_from_string(std::string_view s);
Preset preset_from_string(std::string_view s);

/// Depth/width multipliers. The standard preset uses 5 digital hidden layers
/// of width 2*n_s and one analog hidden layer of width 3*n_ant; half_rf uses
/// 4 + 4 hidden layers of widths 2*n_s and 6*n_ant.
struct PresetShape {
  int digital_hidden_layers;
  int digital_width_factor;
  int analog_hidden_layers;
  int analog_width_factor;

  static PresetShape of(Preset p);
};

struct HdnnOptions {
  cvnn::Activation digital_hidden = cvnn::Activation::CPReLU;
  cvnn::Activation analog_hidden = cvnn::Activation::CPReLU;
};

// Digital network and analog network joined at an RF-chain boundary of width
// n_rf. Downlink runs digital then analog (s -> x); uplink runs analog then
// digital (y -> s_hat).
struct HdnnModel {
  cvnn::Network digital;
  cvnn::Network analog;
  int n_rf = 0;
  int n_s = 0;
  int n_antennas = 0;  // n_tx for downlink, n_rx for uplink
  Direction direction = Direction::Downlink;
  Preset preset = Preset::Standard;
  bool trained = false;

  Eigen::Index input_dim() const;
  Eigen::Index output_dim() const;

  /// Boundary and direction invariants.
  void validate() const;
};

/// n_rf = 0 selects the preset's own width (n_s for standard, n_s/2 for half_rf).
HdnnModel build_hdnn(Preset preset, Direction direction, int n_antennas, int n_s, int n_rf, RngStream& rng,
                     const HdnnOptions& opts = {});

/// Both networks as one layer stack in signal order.
cvnn::Network joined_network(const HdnnModel& model);

/// Writes a joined stack (as produced by joined_network) back into the model.
void assign_joined(HdnnModel& model, const cvnn::Network& joined);

CMatrix hdnn_forward(const HdnnModel& model, const CMatrix& batch);
CVector hdnn_forward(const HdnnModel& model, const CVector& s);

struct AdnnLayer {
  UnitModulusDecomposition decomposition;  // of the augmented [A, b]
  double scale = 1.0;      // 1 / (2c)
  double bias_feed = 1.0;  // level of the constant input line
  cvnn::Activation activation = cvnn::Activation::Linear;
  double slope = cvnn::kDefaultPreluSlope;
};

// Phase-shifter realisation of an analog network. Each layer is a divider,
// two unit-modulus networks and a combiner, so its output is
// (1/sqrt2)(R1 xa/sqrt2 + R2 xa/sqrt2) = [A b] xa / (2c). The constant input
// line of layer l carries the product of the upstream layer scales, which
// keeps the whole chain equal to cumulative_scale * net(x).
struct AdnnRealization {
  std::vector<AdnnLayer> layers;
  double cumulative_scale = 1.0;

  Eigen::Index input_dim() const;
  Eigen::Index output_dim() const;

  /// Product of 1/(2c_l) recomputed from the stored decompositions.
  double recompute_cumulative_scale() const;
};

AdnnRealization realize_adnn(const cvnn::Network& analog);

CMatrix adnn_forward(const AdnnRealization& real, const CMatrix& x_rf);
CVector adnn_forward(const AdnnRealization& real, const CVector& x_rf);

/// HDNN with its analog part replaced by the phase-shifter realisation and the
/// realisation scale compensated (divided out) at the RF boundary.
CMatrix realized_hdnn_forward(const HdnnModel& model, const AdnnRealization& real, const CMatrix& batch);

}  // namespace hdnn

#endif  // HDNN_HDNN_HPP
