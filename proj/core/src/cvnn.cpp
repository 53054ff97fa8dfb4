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

#include "hdnn/cvnn.hpp"

#include "hdnn/error.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>

namespace hdnn::cvnn {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::Linear: return "linear";
    case Activation::CReLU: return "crelu";
    case Activation::CPReLU: return "cprelu";
  }
  return "linear";
}

Activation activation_from_string(std::string_view s) {
  if (s == "linear") return Activation::Linear;
  if (s == "crelu") return Activation::CReLU;
  if (s == "cprelu") return Activation::CPReLU;
  throw Error(ErrorCode::InvalidArgument, "unknown activation '" + std::string(s) + "'");
}

cplx crelu(cplx z) { return {std::max(z.real(), 0.0), std::max(z.imag(), 0.0)}; }

cplx cprelu(cplx z, double a) {
  const double re = z.real() >= 0.0 ? z.real() : a * z.real();
  const double im = z.imag() >= 0.0 ? z.imag() : a * z.imag();
  return {re, im};
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const Layer& l : layers) {
    n += 2 * static_cast<std::size_t>(l.weight.size() + l.bias.size());
    if (l.activation == Activation::CPReLU) ++n;
  }
  return n;
}

void Network::validate() const {
  if (layers.empty()) throw Error(ErrorCode::InvalidArgument, "network has no layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Layer& l = layers[i];
    if (l.weight.rows() < 1 || l.weight.cols() < 1)
      throw Error(ErrorCode::InvalidArgument, "layer " + std::to_string(i) + " has an empty weight");
    if (l.bias.size() != l.weight.rows())
      throw Error(ErrorCode::DimensionMismatch, "layer " + std::to_string(i) + " bias length != out_dim");
    if (i > 0 && layers[i - 1].out_dim() != l.in_dim())
      throw Error(ErrorCode::DimensionMismatch, "layer " + std::to_string(i) + " does not chain with its predecessor");
    if (!all_finite(l.weight) || !all_finite(l.bias))
      throw Error(ErrorCode::InvalidArgument, "layer " + std::to_string(i) + " has non-finite parameters");
    if (l.activation == Activation::CPReLU && !(l.slope > 0.0))
      throw Error(ErrorCode::InvalidArgument, "layer " + std::to_string(i) + " PReLU slope must be > 0");
  }
}

Network make_network(const std::vector<LayerSpec>& specs, RngStream& rng) {
  Network net;
  for (const LayerSpec& s : specs) {
    if (s.in_dim < 1 || s.out_dim < 1) throw Error(ErrorCode::InvalidArgument, "layer dims must be >= 1");
    if (s.activation == Activation::CPReLU && !(s.prelu_slope > 0.0))
      throw Error(ErrorCode::InvalidArgument, "PReLU slope must be > 0");
    Layer l;
    l.activation = s.activation;
    l.slope = s.prelu_slope;
    // Deep narrow stacks with Gaussian init tend to collapse the RF bottleneck
    // to rank one; a norm-preserving start avoids that.
    const Eigen::Index tall = std::max(s.out_dim, s.in_dim);
    const Eigen::Index wide = std::min(s.out_dim, s.in_dim);
    CMatrix g(tall, wide);
    for (Eigen::Index q = 0; q < wide; ++q)
      for (Eigen::Index p = 0; p < tall; ++p) {
        const double re = rng.normal();
        const double im = rng.normal();
        g(p, q) = cplx(re, im);
      }
    const CMatrix q = Eigen::HouseholderQR<CMatrix>(g).householderQ() * CMatrix::Identity(tall, wide);
    if (s.out_dim >= s.in_dim)
      l.weight = q;
    else
      l.weight = q.adjoint();
    l.bias = CVector::Zero(s.out_dim);
    net.layers.push_back(std::move(l));
  }
  net.validate();
  return net;
}

Network make_mlp(const std::vector<int>& widths, Activation hidden, RngStream& rng) {
  if (widths.size() < 2) throw Error(ErrorCode::InvalidArgument, "make_mlp needs at least two widths");
  std::vector<LayerSpec> specs;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    const bool last = i + 2 == widths.size();
    specs.push_back({widths[i], widths[i + 1], last ? Activation::Linear : hidden, kDefaultPreluSlope});
  }
  return make_network(specs, rng);
}

Network concat(const Network& first, const Network& second) {
  if (!first.layers.empty() && !second.layers.empty() && first.output_dim() != second.input_dim())
    throw Error(ErrorCode::DimensionMismatch, "concat: boundary widths differ");
  Network out = first;
  out.layers.insert(out.layers.end(), second.layers.begin(), second.layers.end());
  return out;
}

void apply_activation(CMatrix& z, Activation act, double slope) {
  if (act == Activation::Linear) return;
  const double neg = act == Activation::CPReLU ? slope : 0.0;
  cplx* d = z.data();
  const Eigen::Index n = z.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double re = d[i].real();
    const double im = d[i].imag();
    d[i] = cplx(re >= 0.0 ? re : neg * re, im >= 0.0 ? im : neg * im);
  }
}

CMatrix forward(const Network& net, const CMatrix& x, ForwardCache* cache) {
  if (net.layers.empty()) throw Error(ErrorCode::InvalidArgument, "forward: empty network");
  if (x.rows() != net.input_dim())
    throw Error(ErrorCode::DimensionMismatch, "forward: input length " + std::to_string(x.rows()) +
                                                  " != network input " + std::to_string(net.input_dim()));
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
    cache->inputs.reserve(net.layers.size());
    cache->pre.reserve(net.layers.size());
  }
  CMatrix a = x;
  for (const Layer& l : net.layers) {
    CMatrix z = l.weight * a;
    z.colwise() += l.bias;
    if (cache) {
      cache->inputs.push_back(std::move(a));
      cache->pre.push_back(z);
    }
    apply_activation(z, l.activation, l.slope);
    a = std::move(z);
  }
  return a;
}

CVector forward(const Network& net, const CVector& x) {
  const CMatrix y = forward(net, CMatrix(x), nullptr);
  return y.col(0);
}

Gradients Gradients::zeros_like(const Network& net) {
  Gradients g;
  for (const Layer& l : net.layers) {
    g.layers.push_back({CMatrix::Zero(l.out_dim(), l.in_dim()), CVector::Zero(l.out_dim()), 0.0});
  }
  return g;
}

void Gradients::add(const Gradients& other) {
  if (other.layers.size() != layers.size()) throw Error(ErrorCode::DimensionMismatch, "Gradients::add");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    layers[i].weight += other.layers[i].weight;
    layers[i].bias += other.layers[i].bias;
    layers[i].slope += other.layers[i].slope;
  }
}

Gradients backward(const Network& net, const ForwardCache& cache, const CMatrix& output_grad) {
  const std::size_t n_layers = net.layers.size();
  if (cache.pre.size() != n_layers || cache.inputs.size() != n_layers)
    throw Error(ErrorCode::DimensionMismatch, "backward: cache does not match network");
  if (output_grad.rows() != net.output_dim() || output_grad.cols() != cache.pre.back().cols())
    throw Error(ErrorCode::DimensionMismatch, "backward: output gradient shape mismatch");

  Gradients g;
  g.layers.resize(n_layers);
  CMatrix grad = output_grad;
  for (std::size_t idx = n_layers; idx-- > 0;) {
    const Layer& l = net.layers[idx];
    const CMatrix& z = cache.pre[idx];
    LayerGrad& lg = g.layers[idx];

    if (l.activation != Activation::Linear) {
      const double neg = l.activation == Activation::CPReLU ? l.slope : 0.0;
      double dslope = 0.0;
      cplx* gd = grad.data();
      const cplx* zd = z.data();
      const Eigen::Index n = grad.size();
      for (Eigen::Index i = 0; i < n; ++i) {
        const double zr = zd[i].real();
        const double zi = zd[i].imag();
        double gr = gd[i].real();
        double gi = gd[i].imag();
        if (zr < 0.0) {
          dslope += zr * gr;
          gr *= neg;
        }
        if (zi < 0.0) {
          dslope += zi * gi;
          gi *= neg;
        }
        gd[i] = cplx(gr, gi);
      }
      lg.slope = l.activation == Activation::CPReLU ? dslope : 0.0;
    }

    lg.weight.noalias() = grad * cache.inputs[idx].adjoint();
    lg.bias = grad.rowwise().sum();
    CMatrix next = l.weight.adjoint() * grad;
    grad = std::move(next);
  }
  g.input = std::move(grad);
  return g;
}

LossAndGrad mae_loss(const CMatrix& y_hat, const CMatrix& y_target) {
  if (y_hat.rows() != y_target.rows() || y_hat.cols() != y_target.cols())
    throw Error(ErrorCode::DimensionMismatch, "mae_loss: shapes differ");
  LossAndGrad out;
  out.grad.resize(y_hat.rows(), y_hat.cols());
  const double inv_n = 1.0 / static_cast<double>(y_hat.size());
  double acc = 0.0;
  for (Eigen::Index j = 0; j < y_hat.cols(); ++j) {
    for (Eigen::Index i = 0; i < y_hat.rows(); ++i) {
      const cplx e = y_hat(i, j) - y_target(i, j);
      const double m = std::abs(e);
      acc += m;
      out.grad(i, j) = m > 0.0 ? e * (inv_n / m) : cplx(0.0, 0.0);
    }
  }
  out.loss = acc * inv_n;
  return out;
}

E2eResult e2e_loss(const Network& net, const CVector& s, const CMatrix& c_fixed, const CMatrix& h_fixed) {
  if (h_fixed.cols() != net.output_dim() || c_fixed.cols() != h_fixed.rows() || c_fixed.rows() != s.size() ||
      s.size() != net.input_dim())
    throw Error(ErrorCode::DimensionMismatch, "e2e_loss: s -> net -> H -> C -> s chain is inconsistent");
  ForwardCache cache;
  const CMatrix y = forward(net, CMatrix(s), &cache);
  const CMatrix k = c_fixed * h_fixed;
  const CVector r = k * y.col(0) - s;
  E2eResult out;
  out.loss = r.norm();
  CMatrix gy = CMatrix::Zero(y.rows(), 1);
  if (out.loss > 0.0) gy.col(0) = k.adjoint() * r / out.loss;
  out.grads = backward(net, cache, gy);
  // s also enters the residual directly.
  if (out.loss > 0.0) out.grads.input.col(0) -= r / out.loss;
  return out;
}

AdamState AdamState::for_network(const Network& net, const AdamHyper& hyper) {
  AdamState st;
  st.hyper = hyper;
  for (const Layer& l : net.layers) {
    st.m_weight.push_back(CMatrix::Zero(l.out_dim(), l.in_dim()));
    st.v_weight.push_back(CMatrix::Zero(l.out_dim(), l.in_dim()));
    st.m_bias.push_back(CVector::Zero(l.out_dim()));
    st.v_bias.push_back(CVector::Zero(l.out_dim()));
    st.m_slope.push_back(0.0);
    st.v_slope.push_back(0.0);
  }
  return st;
}

namespace {

struct AdamCoeffs {
  double b1, b2, c1, c2, lr, eps;
};

inline double adam_update(double& m, double& v, double g, const AdamCoeffs& k) {
  m = k.b1 * m + (1.0 - k.b1) * g;
  v = k.b2 * v + (1.0 - k.b2) * g * g;
  return k.lr * (m / k.c1) / (std::sqrt(v / k.c2) + k.eps);
}

template <typename Param>
void adam_complex(Param& p, Param& m, Param& v, const Param& g, const AdamCoeffs& k) {
  const Eigen::Index n = p.size();
  cplx* pd = p.data();
  cplx* md = m.data();
  cplx* vd = v.data();
  const cplx* gd = g.data();
  for (Eigen::Index i = 0; i < n; ++i) {
    double mr = md[i].real(), mi = md[i].imag();
    double vr = vd[i].real(), vi = vd[i].imag();
    const double dr = adam_update(mr, vr, gd[i].real(), k);
    const double di = adam_update(mi, vi, gd[i].imag(), k);
    md[i] = cplx(mr, mi);
    vd[i] = cplx(vr, vi);
    pd[i] -= cplx(dr, di);
  }
}

}  // namespace

void adam_step(Network& net, const Gradients& grads, AdamState& state) {
  if (grads.layers.size() != net.layers.size() || state.m_weight.size() != net.layers.size())
    throw Error(ErrorCode::DimensionMismatch, "adam_step: parameter/gradient/state shapes differ");
  ++state.step;
  const AdamHyper& h = state.hyper;
  const double t = static_cast<double>(state.step);
  const AdamCoeffs k{h.beta1, h.beta2, 1.0 - std::pow(h.beta1, t), 1.0 - std::pow(h.beta2, t), h.learning_rate,
                     h.epsilon};

  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    Layer& l = net.layers[i];
    const LayerGrad& g = grads.layers[i];
    if (g.weight.rows() != l.weight.rows() || g.weight.cols() != l.weight.cols() || g.bias.size() != l.bias.size())
      throw Error(ErrorCode::DimensionMismatch, "adam_step: gradient shape mismatch at layer " + std::to_string(i));
    adam_complex(l.weight, state.m_weight[i], state.v_weight[i], g.weight, k);
    adam_complex(l.bias, state.m_bias[i], state.v_bias[i], g.bias, k);
    if (l.activation == Activation::CPReLU) {
      l.slope -= adam_update(state.m_slope[i], state.v_slope[i], g.slope, k);
      if (l.slope < kMinPreluSlope) l.slope = kMinPreluSlope;
    }
  }
}

}  // namespace hdnn::cvnn
