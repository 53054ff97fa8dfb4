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

#ifndef HDNN_TEST_ORACLES_HPP
#define HDNN_TEST_ORACLES_HPP

// Reference computations written independently of the library code paths.
// Nothing here calls into hdnn:: beyond basic types and the RNG.

#include "hdnn/cvnn.hpp"
#include "hdnn/numerics.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace oracle {

using hdnn::CMatrix;
using hdnn::CVector;
using hdnn::cplx;

inline CMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, hdnn::RngStream& rng, double scale = 1.0) {
  CMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = cplx(scale * rng.normal(), scale * rng.normal());
  return m;
}

/// Singular values from Eigen's two-sided Jacobi, descending.
inline std::vector<double> singular_values(const CMatrix& a) {
  Eigen::JacobiSVD<CMatrix> js(a);
  const auto& s = js.singularValues();
  return std::vector<double>(s.data(), s.data() + s.size());
}

/// Water-filling by enumerating active sets: the k strongest gains are active
/// for the largest k whose level mu = (P + sum 1/g) / k stays above 1/g_k.
inline std::vector<double> water_fill_enumerated(const std::vector<double>& gains, double budget) {
  std::vector<std::size_t> idx(gains.size());
  std::iota(idx.begin(), idx.end(), 0u);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return gains[a] > gains[b]; });
  double mu = 0.0;
  for (std::size_t k = 1; k <= gains.size(); ++k) {
    double inv = 0.0;
    for (std::size_t i = 0; i < k; ++i) inv += 1.0 / gains[idx[i]];
    const double level = (budget + inv) / static_cast<double>(k);
    if (level > 1.0 / gains[idx[k - 1]]) mu = level;
  }
  std::vector<double> p(gains.size());
  for (std::size_t i = 0; i < gains.size(); ++i) p[i] = std::max(mu - 1.0 / gains[i], 0.0);
  return p;
}

/// Water-filling by bisection on the level mu of sum max(mu - 1/g, 0) = P,
/// run until the bracket stops shrinking.
inline std::vector<double> water_fill_bisection(const std::vector<double>& gains, double budget) {
  auto used = [&](double mu) {
    double t = 0.0;
    for (double g : gains) t += std::max(mu - 1.0 / g, 0.0);
    return t;
  };
  double lo = 0.0;
  double hi = budget;
  for (double g : gains) hi = std::max(hi, budget + 1.0 / g);
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (used(mid) < budget ? lo : hi) = mid;
  }
  std::vector<double> p(gains.size());
  for (std::size_t i = 0; i < gains.size(); ++i) p[i] = std::max(hi - 1.0 / gains[i], 0.0);
  return p;
}

inline double rate(const std::vector<double>& gains, const std::vector<double>& p) {
  double r = 0.0;
  for (std::size_t i = 0; i < gains.size(); ++i) r += std::log2(1.0 + gains[i] * p[i]);
  return r;
}

inline double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

/// Gray 4-QAM BER on a unit-gain AWGN channel with per-symbol SNR `snr`
/// (unit-energy symbols, CN(0, 1/snr) noise).
inline double qam4_ber(double snr) { return q_function(std::sqrt(snr)); }

/// log2 det via Eigen's self-adjoint eigen solver.
inline double log2_det(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) acc += std::log2(es.eigenvalues()(i));
  return acc;
}

/// Plain reference forward pass, written out per sample.
inline CVector forward(const hdnn::cvnn::Network& net, const CVector& x) {
  CVector h = x;
  for (const auto& l : net.layers) {
    CVector z = l.weight * h + l.bias;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      auto part = [&](double v) {
        switch (l.activation) {
          case hdnn::cvnn::Activation::Linear: return v;
          case hdnn::cvnn::Activation::CReLU: return v > 0.0 ? v : 0.0;
          case hdnn::cvnn::Activation::CPReLU: return v > 0.0 ? v : l.slope * v;
        }
        return v;
      };
      z(i) = cplx(part(z(i).real()), part(z(i).imag()));
    }
    h = z;
  }
  return h;
}

/// Central difference of a scalar function of a real parameter.
inline double central_difference(const std::function<double(double)>& f, double x0, double step) {
  return (f(x0 + step) - f(x0 - step)) / (2.0 * step);
}

inline double rel_err(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline double rel_err(const CMatrix& a, const CMatrix& b) {
  const double d = b.norm();
  return (a - b).norm() / (d > 0.0 ? d : 1.0);
}

}  // namespace oracle

#endif  // HDNN_TEST_ORACLES_HPP
