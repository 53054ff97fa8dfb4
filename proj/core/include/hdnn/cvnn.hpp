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

#ifndef HDNN_CVNN_HPP
#define HDNN_CVNN_HPP

#include "hdnn/numerics.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Complex-valued feed-forward networks.
//
// Gradients follow the split-complex convention: every complex parameter is a
// pair of real parameters and a gradient is stored as dL/dRe + j dL/dIm. For
// an affine map z = A x + b that gives dA = G x^H, db = G, dx = A^H G.
namespace hdnn::cvnn {

enum class Activation { Linear, CReLU, CPReLU };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view s);

inline constexpr double kDefaultPreluSlope = 0.25;
inline constexpr double kMinPreluSlope = 1e-6;

cplx crelu(cplx z);
cplx cprelu(cplx z, double a);

struct LayerSpec {
  int in_dim = 1;
  int out_dim = 1;
  Activation activation = Activation::Linear;
  double prelu_slope = kDefaultPreluSlope;  // initial slope for CPReLU
};

struct Layer {
  Activation activation = Activation::Linear;
  CMatrix weight;  // out x in
  CVector bias;    // out
  double slope = kDefaultPreluSlope;  // only meaningful for CPReLU

  Eigen::Index in_dim() const { return weight.cols(); }
  Eigen::Index out_dim() const { return weight.rows(); }
};

struct Network {
  std::vector<Layer> layers;

  Eigen::Index input_dim() const { return layers.empty() ? 0 : layers.front().in_dim(); }
  Eigen::Index output_dim() const { return layers.empty() ? 0 : layers.back().out_dim(); }
  std::size_t parameter_count() const;  // real parameters

  /// Dimension chaining, finiteness and slope positivity.
  void validate() const;
};

/// Semi-unitary init: W has orthonormal columns (out >= in) or rows (out < in),
/// drawn from the QR of a complex Gaussian matrix. Zero bias.
Network make_network(const std::vector<LayerSpec>& specs, RngStream& rng);

/// Widths [d0, d1, ..., dL]; hidden layers use `hidden`, the last is Linear.
Network make_mlp(const std::vector<int>& widths, Activation hidden, RngStream& rng);

/// Layers of `first` followed by layers of `second`.
Network concat(const Network& first, const Network& second);

void apply_activation(CMatrix& z, Activation act, double slope);

struct ForwardCache {
  std::vector<CMatrix> inputs;  // input to layer l (dim x batch)
  std::vector<CMatrix> pre;     // affine output of layer l
};

/// Forward on a batch (one column per sample).
CMatrix forward(const Network& net, const CMatrix& x, ForwardCache* cache = nullptr);
CVector forward(const Network& net, const CVector& x);

struct LayerGrad {
  CMatrix weight;
  CVector bias;
  double slope = 0.0;
};

struct Gradients {
  std::vector<LayerGrad> layers;
  CMatrix input;  // dL/dx in the same convention

  static Gradients zeros_like(const Network& net);
  void add(const Gradients& other);
};

/// Backpropagates output_grad (dim x batch) through the cached forward pass.
Gradients backward(const Network& net, const ForwardCache& cache, const CMatrix& output_grad);

struct LossAndGrad {
  double loss = 0.0;
  CMatrix grad;  // w.r.t. the prediction
};

/// Mean over all entries of |yhat - y|; subgradient is 0 where the error is 0.
LossAndGrad mae_loss(const CMatrix& y_hat, const CMatrix& y_target);

struct E2eResult {
  double loss = 0.0;
  Gradients grads;
};

/// || C H net(s) - s ||_2 with C and H fixed.
E2eResult e2e_loss(const Network& net, const CVector& s, const CMatrix& c_fixed, const CMatrix& h_fixed);

struct AdamHyper {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamHyper hyper;
  std::int64_t step = 0;
  // Moments per layer; re and im components are tracked separately inside the
  // complex storage (m.real() is the moment of the real part, and so on).
  std::vector<CMatrix> m_weight, v_weight;
  std::vector<CVector> m_bias, v_bias;
  std::vector<double> m_slope, v_slope;

  static AdamState for_network(const Network& net, const AdamHyper& hyper);
};

void adam_step(Network& net, const Gradients& grads, AdamState& state);

}  // namespace hdnn::cvnn

#endif  // HDNN_CVNN_HPP
