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

#include "hdnn/beamforming.hpp"

#include "hdnn/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hdnn {

UnitModulusDecomposition decompose_unit_modulus(const CMatrix& a) {
  if (a.size() == 0) throw Error(ErrorCode::InvalidArgument, "decompose_unit_modulus: empty matrix");
  if (!all_finite(a)) throw Error(ErrorCode::InvalidArgument, "decompose_unit_modulus: non-finite entries");

  const double max_mod = a.cwiseAbs().maxCoeff();
  if (max_mod == 0.0) throw Error(ErrorCode::AllZeroMatrix, "decompose_unit_modulus: every entry is zero");

  UnitModulusDecomposition d;
  d.c = 0.5 * max_mod;
  d.r1.resize(a.rows(), a.cols());
  d.r2.resize(a.rows(), a.cols());
  for (Eigen::Index q = 0; q < a.cols(); ++q) {
    for (Eigen::Index p = 0; p < a.rows(); ++p) {
      const double mag = std::abs(a(p, q));
      const double theta = std::arg(a(p, q));
      const double delta = std::acos(std::clamp(mag / (2.0 * d.c), -1.0, 1.0));
      d.r1(p, q) = std::polar(1.0, theta + delta);
      d.r2(p, q) = std::polar(1.0, theta - delta);
    }
  }
  return d;
}

namespace {

void check_streams(const CMatrix& h, int n_s) {
  const auto max_s = std::min(h.rows(), h.cols());
  if (n_s < 1 || n_s > max_s) {
    throw Error(ErrorCode::InvalidArgument,
                "n_s=" + std::to_string(n_s) + " must lie in [1, " + std::to_string(max_s) + "]");
  }
}

void check_rank(const SvdFactors& f, int n_s) {
  const double floor = 1e-9 * f.sigma(0);
  int strong = 0;
  for (Eigen::Index k = 0; k < f.sigma.size(); ++k)
    if (f.sigma(k) > floor) ++strong;
  if (f.sigma(0) == 0.0 || strong < n_s) {
    throw Error(ErrorCode::RankDeficient, "only " + std::to_string(strong) +
                                              " singular values above 1e-9*sigma_1, need " + std::to_string(n_s));
  }
}

}  // namespace

FdPrecoder fd_precoder(const CMatrix& h, int n_s, double rho) {
  check_streams(h, n_s);
  if (!(rho > 0.0)) throw Error(ErrorCode::InvalidArgument, "fd_precoder: rho must be > 0");
  FdPrecoder out;
  out.svd = svd(h);
  check_rank(out.svd, n_s);

  std::vector<double> gains(static_cast<std::size_t>(n_s));
  for (int k = 0; k < n_s; ++k) gains[static_cast<std::size_t>(k)] = rho * out.svd.sigma(k) * out.svd.sigma(k);
  out.stream_powers = water_fill(gains, 1.0);

  out.p = out.svd.v.leftCols(n_s);
  for (int k = 0; k < n_s; ++k) out.p.col(k) *= std::sqrt(out.stream_powers[static_cast<std::size_t>(k)]);
  return out;
}

FdCombiner fd_combiner(const CMatrix& h, int n_s) {
  check_streams(h, n_s);
  FdCombiner out;
  out.svd = svd(h);
  check_rank(out.svd, n_s);
  out.c = out.svd.u.leftCols(n_s).adjoint();
  return out;
}

double se_downlink(const CMatrix& h, const CMatrix& p, double rho) {
  if (h.cols() != p.rows()) throw Error(ErrorCode::DimensionMismatch, "se_downlink: H cols != P rows");
  if (rho < 0.0) throw Error(ErrorCode::InvalidArgument, "se_downlink: rho must be >= 0");
  const CMatrix hp = h * p;
  CMatrix m = CMatrix::Identity(h.rows(), h.rows()) + rho * hp * hp.adjoint();
  return std::max(0.0, log2_det_hpd(m));
}

double se_uplink(const CMatrix& h, const CMatrix& c, double rho) {
  if (c.cols() != h.rows()) throw Error(ErrorCode::DimensionMismatch, "se_uplink: C cols != H rows");
  if (rho < 0.0) throw Error(ErrorCode::InvalidArgument, "se_uplink: rho must be >= 0");
  const CMatrix gram = c * c.adjoint();
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram, Eigen::EigenvaluesOnly);
  const double lmax = eig.eigenvalues().maxCoeff();
  const double lmin = eig.eigenvalues().minCoeff();
  if (!(lmax > 0.0) || lmin <= 1e-12 * lmax) {
    throw Error(ErrorCode::SingularGram, "se_uplink: C C^H is not invertible");
  }
  // det(I + rho G^-1 M) = det(G + rho M) / det(G) with G, M Hermitian.
  const CMatrix ch = c * h;
  const CMatrix m = gram + rho * ch * ch.adjoint();
  return std::max(0.0, log2_det_hpd(m) - log2_det_hpd(gram));
}

}  // namespace hdnn
