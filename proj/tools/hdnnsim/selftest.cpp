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

#include "selftest.hpp"

#include "hdnn/beamforming.hpp"
#include "hdnn/cvnn.hpp"
#include "hdnn/hdnn.hpp"
#include "hdnn/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

namespace hdnnsim {

using namespace hdnn;

namespace {

CMatrix gaussian(Eigen::Index r, Eigen::Index c, RngStream& rng) {
  CMatrix m(r, c);
  for (Eigen::Index q = 0; q < c; ++q)
    for (Eigen::Index p = 0; p < r; ++p) {
      const double re = rng.normal();
      const double im = rng.normal();
      m(p, q) = cplx(re, im);
    }
  return m;
}

std::string fmt(const char* f, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Max ||A - c(R1+R2)||_F and max ||R| - 1| over random matrices with zeros.
double decomposition_error(RngStream& rng) {
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const auto rows = static_cast<Eigen::Index>(1 + rng.below(32));
    const auto cols = static_cast<Eigen::Index>(1 + rng.below(32));
    CMatrix a = gaussian(rows, cols, rng);
    for (Eigen::Index k = 0; k < a.size(); ++k)
      if (rng.uniform() < 0.1) a(k) = 0.0;
    if (a.cwiseAbs().maxCoeff() == 0.0) a(0) = 1.0;
    const UnitModulusDecomposition d = decompose_unit_modulus(a);
    worst = std::max(worst, (a - d.c * (d.r1 + d.r2)).norm());
    worst = std::max(worst, (d.r1.cwiseAbs().array() - 1.0).abs().maxCoeff());
    worst = std::max(worst, (d.r2.cwiseAbs().array() - 1.0).abs().maxCoeff());
  }
  return worst;
}

double squared_loss(const cvnn::Network& net, const CMatrix& x, const CMatrix& y) {
  return (cvnn::forward(net, x) - y).squaredNorm();
}

// Largest relative error between backprop and central differences on a
// squared-error loss. Components whose nudge could cross an activation kink
// are skipped.
double gradient_error(RngStream& rng) {
  constexpr double kStep = 1e-6;
  constexpr double kMargin = 1e-3;
  double worst = 0.0;
  for (auto act : {cvnn::Activation::Linear, cvnn::Activation::CReLU, cvnn::Activation::CPReLU}) {
    bool checked = false;
    for (int attempt = 0; attempt < 20 && !checked; ++attempt) {
      cvnn::Network net = cvnn::make_mlp({3, 5, 4, 2}, act, rng);
      for (auto& l : net.layers) {
        l.bias = 0.2 * gaussian(l.out_dim(), 1, rng).col(0);
        l.slope = 0.1 + 0.5 * rng.uniform();
      }
      const CMatrix x = gaussian(3, 4, rng);
      const CMatrix y = gaussian(2, 4, rng);

      cvnn::ForwardCache cache;
      const CMatrix out = cvnn::forward(net, x, &cache);
      bool near_kink = false;
      for (std::size_t l = 0; l + 1 < cache.pre.size(); ++l) {
        const CMatrix& z = cache.pre[l];
        for (Eigen::Index k = 0; k < z.size(); ++k)
          near_kink |= std::abs(z(k).real()) < kMargin || std::abs(z(k).imag()) < kMargin;
      }
      if (near_kink && act != cvnn::Activation::Linear) continue;
      checked = true;
      const cvnn::Gradients g = cvnn::backward(net, cache, 2.0 * (out - y));

      auto probe = [&](double& param, double analytic) {
        const double saved = param;
        param = saved + kStep;
        const double up = squared_loss(net, x, y);
        param = saved - kStep;
        const double down = squared_loss(net, x, y);
        param = saved;
        const double fd = (up - down) / (2.0 * kStep);
        const double rel = std::abs(fd - analytic) / std::max({std::abs(fd), std::abs(analytic), 1e-6});
        worst = std::max(worst, rel);
      };
      for (std::size_t l = 0; l < net.layers.size(); ++l) {
        auto& layer = net.layers[l];
        for (Eigen::Index k = 0; k < layer.weight.size(); ++k) {
          auto* w = reinterpret_cast<double*>(&layer.weight(k));
          probe(w[0], g.layers[l].weight(k).real());
          probe(w[1], g.layers[l].weight(k).imag());
        }
        for (Eigen::Index k = 0; k < layer.bias.size(); ++k) {
          auto* b = reinterpret_cast<double*>(&layer.bias(k));
          probe(b[0], g.layers[l].bias(k).real());
          probe(b[1], g.layers[l].bias(k).imag());
        }
        if (layer.activation == cvnn::Activation::CPReLU) probe(layer.slope, g.layers[l].slope);
      }
    }
    if (!checked) return std::numeric_limits<double>::infinity();
  }
  return worst;
}

// Max violation of the water-filling KKT conditions: p_k = max(mu - 1/g_k, 0)
// and sum p_k = budget.
double water_fill_violation(RngStream& rng) {
  double worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    const auto k = static_cast<std::size_t>(1 + rng.below(8));
    std::vector<double> gains(k);
    for (double& g : gains) g = std::exp(4.0 * rng.uniform() - 2.0);
    const double budget = 0.1 + 4.0 * rng.uniform();
    const std::vector<double> p = water_fill(gains, budget);
    const double mu = water_level(gains, budget);
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      worst = std::max(worst, std::abs(p[i] - std::max(mu - 1.0 / gains[i], 0.0)));
      sum += p[i];
    }
    worst = std::max(worst, std::abs(sum - budget));
  }
  return worst;
}

// Max relative gap between the phase-shifter network and cumulative_scale * net.
double adnn_gap(RngStream& rng) {
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    std::vector<int> widths;
    const int depth = 1 + static_cast<int>(rng.below(3));
    for (int i = 0; i <= depth; ++i) widths.push_back(1 + static_cast<int>(rng.below(24)));
    const auto act = rng.below(2) ? cvnn::Activation::CPReLU : cvnn::Activation::CReLU;
    cvnn::Network net = cvnn::make_mlp(widths, act, rng);
    for (auto& l : net.layers) l.bias = 0.3 * gaussian(l.out_dim(), 1, rng).col(0);
    const AdnnRealization real = realize_adnn(net);
    const CMatrix x = gaussian(net.input_dim(), 20, rng);
    const CMatrix want = real.cumulative_scale * cvnn::forward(net, x);
    const double den = std::max(want.norm(), 1e-300);
    worst = std::max(worst, (adnn_forward(real, x) - want).norm() / den);
  }
  return worst;
}

struct Invariant {
  const char* name;
  double tolerance;
  std::function<double(RngStream&)> measure;
};

const std::vector<Invariant>& invariants() {
  static const std::vector<Invariant> list = {
      {"decomposition_roundtrip", 1e-10, decomposition_error},
      {"gradient_check", 1e-5, gradient_error},
      {"water_fill_kkt", 1e-10, water_fill_violation},
      {"adnn_equivalence", 1e-9, adnn_gap},
  };
  return list;
}

}  // namespace

std::vector<std::string> selftest_invariants() {
  std::vector<std::string> names;
  for (const auto& inv : invariants()) names.emplace_back(inv.name);
  return names;
}

std::vector<InvariantResult> run_selftest(unsigned long long seed, const std::string& inject_failure) {
  std::vector<InvariantResult> out;
  const RngStream master(seed);
  std::uint64_t index = 0;
  for (const auto& inv : invariants()) {
    RngStream rng = master.split(index++);
    InvariantResult r;
    r.name = inv.name;
    r.tolerance = inject_failure == inv.name ? -1.0 : inv.tolerance;
    try {
      r.measured = inv.measure(rng);
      r.passed = std::isfinite(r.measured) && r.measured <= r.tolerance;
      r.detail = fmt("max error %.3e", r.measured) + fmt(" (tolerance %.1e)", r.tolerance);
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace hdnnsim
