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

#include "hdnn/numerics.hpp"

#include "hdnn/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hdnn {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t RngStream::child_seed(std::uint64_t parent, std::uint64_t index) {
  return splitmix64(splitmix64(parent) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

std::uint64_t RngStream::below(std::uint64_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "RngStream::below(0)");
  // Rejection sampling keeps the result unbiased and platform independent.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform_open();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * kPi * u2;
  spare_ = r * std::sin(t);
  has_spare_ = true;
  return r * std::cos(t);
}

CVector complex_gaussian(Eigen::Index n, RngStream& rng) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "complex_gaussian: n must be >= 1");
  const double s = std::sqrt(0.5);
  CVector out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double re = rng.normal();
    const double im = rng.normal();
    out(i) = cplx(s * re, s * im);
  }
  return out;
}

double laplacian_angle(double mean, double spread, RngStream& rng) {
  if (!(spread > 0.0)) throw Error(ErrorCode::InvalidArgument, "laplacian_angle: spread must be > 0");
  const double b = spread / std::sqrt(2.0);
  // Inverse CDF on u in (-1/2, 1/2).
  const double u = rng.uniform_open() - 0.5;
  const double mag = -b * std::log1p(-2.0 * std::abs(u));
  return u < 0.0 ? mean - mag : mean + mag;
}

CMatrix SvdFactors::reconstruct() const {
  return u * sigma.cast<cplx>().asDiagonal() * v.adjoint();
}

namespace {

struct TallSvd {
  CMatrix w;
  CMatrix v;
};

// One-sided Jacobi on the columns of w (rows >= cols). On return the columns
// of w are mutually orthogonal and a = w * v^H.
TallSvd jacobi_orthogonalize(const CMatrix& a, const SvdOptions& opts) {
  const Eigen::Index n = a.cols();
  TallSvd out{a, CMatrix::Identity(n, n)};
  CMatrix& w = out.w;
  CMatrix& v = out.v;

  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    bool rotated = false;
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double alpha = w.col(p).squaredNorm();
        const double beta = w.col(q).squaredNorm();
        if (alpha == 0.0 || beta == 0.0) continue;
        const cplx gamma = w.col(p).dot(w.col(q));  // w_p^H w_q
        const double g = std::abs(gamma);
        if (g <= opts.tolerance * std::sqrt(alpha * beta)) continue;
        rotated = true;

        // Rotate w_q by the phase of gamma so the 2x2 Gram block is real,
        // then apply the symmetric Schur rotation.
        const cplx phase = std::conj(gamma) / g;
        const double zeta = (beta - alpha) / (2.0 * g);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;

        const CVector wp = w.col(p);
        const CVector wq = w.col(q) * phase;
        w.col(p) = c * wp - s * wq;
        w.col(q) = s * wp + c * wq;

        const CVector vp = v.col(p);
        const CVector vq = v.col(q) * phase;
        v.col(p) = c * vp - s * vq;
        v.col(q) = s * vp + c * vq;
      }
    }
    if (!rotated) return out;
  }
  throw Error(ErrorCode::ConvergenceFailure,
              "svd: Jacobi sweeps did not converge within " + std::to_string(opts.max_sweeps));
}

// Fill the listed columns of u with unit vectors orthogonal to all others.
void complete_orthonormal(CMatrix& u, const std::vector<Eigen::Index>& missing) {
  const Eigen::Index m = u.rows();
  std::vector<bool> filled(static_cast<std::size_t>(u.cols()), true);
  for (auto k : missing) filled[static_cast<std::size_t>(k)] = false;

  Eigen::Index candidate = 0;
  for (auto k : missing) {
    for (; candidate < m; ++candidate) {
      CVector e = CVector::Zero(m);
      e(candidate) = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index j = 0; j < u.cols(); ++j) {
          if (!filled[static_cast<std::size_t>(j)]) continue;
          e -= u.col(j) * u.col(j).dot(e);
        }
      }
      const double nrm = e.norm();
      if (nrm > 1e-6) {
        u.col(k) = e / nrm;
        filled[static_cast<std::size_t>(k)] = true;
        ++candidate;
        break;
      }
    }
  }
}

SvdFactors svd_tall(const CMatrix& a, const SvdOptions& opts) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  TallSvd js = jacobi_orthogonalize(a, opts);

  RVector norms(n);
  for (Eigen::Index k = 0; k < n; ++k) norms(k) = js.w.col(k).norm();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return norms(i) > norms(j); });

  SvdFactors f{CMatrix(m, n), RVector(n), CMatrix(n, n)};
  const double smax = norms.size() ? norms(order.front()) : 0.0;
  const double zero_tol = static_cast<double>(std::max(m, n)) * std::numeric_limits<double>::epsilon() * smax;
  std::vector<Eigen::Index> missing;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    f.sigma(k) = norms(src);
    f.v.col(k) = js.v.col(src);
    if (norms(src) > zero_tol && norms(src) > 0.0) {
      f.u.col(k) = js.w.col(src) / norms(src);
    } else {
      f.u.col(k).setZero();
      missing.push_back(k);
    }
  }
  if (!missing.empty()) complete_orthonormal(f.u, missing);
  return f;
}

}  // namespace

SvdFactors svd(const CMatrix& a, const SvdOptions& opts) {
  if (a.rows() == 0 || a.cols() == 0) throw Error(ErrorCode::InvalidArgument, "svd: empty matrix");
  if (!all_finite(a)) throw Error(ErrorCode::InvalidArgument, "svd: non-finite entries");

  SvdFactors f;
  if (a.rows() >= a.cols()) {
    f = svd_tall(a, opts);
  } else {
    SvdFactors t = svd_tall(a.adjoint(), opts);
    f = SvdFactors{std::move(t.v), std::move(t.sigma), std::move(t.u)};
  }

  for (Eigen::Index k = 0; k < f.v.cols(); ++k) {
    Eigen::Index imax = 0;
    f.v.col(k).cwiseAbs().maxCoeff(&imax);
    const cplx lead = f.v(imax, k);
    const double mag = std::abs(lead);
    if (mag == 0.0) continue;
    const cplx rot = std::conj(lead) / mag;
    f.v.col(k) *= rot;
    f.u.col(k) *= rot;
    f.v(imax, k) = cplx(std::abs(f.v(imax, k)), 0.0);
  }
  return f;
}

double water_level(std::span<const double> gains, double budget) {
  if (gains.empty()) throw Error(ErrorCode::InvalidArgument, "water_fill: no gains");
  if (!(budget > 0.0)) throw Error(ErrorCode::InvalidArgument, "water_fill: budget must be > 0");
  double inv_min = std::numeric_limits<double>::infinity();
  double inv_max = 0.0;
  for (double g : gains) {
    if (!(g > 0.0) || !std::isfinite(g)) throw Error(ErrorCode::InvalidArgument, "water_fill: gains must be finite and > 0");
    inv_min = std::min(inv_min, 1.0 / g);
    inv_max = std::max(inv_max, 1.0 / g);
  }
  auto filled = [&](double mu) {
    double s = 0.0;
    for (double g : gains) s += std::max(mu - 1.0 / g, 0.0);
    return s;
  };

  double lo = inv_min;
  double hi = inv_max + budget;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (filled(mid) < budget ? lo : hi) = mid;
  }
  const double mu = 0.5 * (lo + hi);

  // Resolve the level exactly on the active set found by bisection.
  double inv_sum = 0.0;
  int active = 0;
  for (double g : gains) {
    if (mu - 1.0 / g > 0.0) {
      inv_sum += 1.0 / g;
      ++active;
    }
  }
  if (active == 0) return mu;
  const double exact = (budget + inv_sum) / active;
  for (double g : gains) {
    // The active set must be self-consistent; fall back to bisection otherwise.
    if ((mu - 1.0 / g > 0.0) != (exact - 1.0 / g > 0.0)) return mu;
  }
  return exact;
}

std::vector<double> water_fill(std::span<const double> gains, double budget) {
  const double mu = water_level(gains, budget);
  std::vector<double> p(gains.size());
  for (std::size_t k = 0; k < gains.size(); ++k) p[k] = std::max(mu - 1.0 / gains[k], 0.0);
  return p;
}

double log2_det_hpd(const CMatrix& m) {
  Eigen::LLT<CMatrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::InvalidArgument, "log2_det_hpd: matrix is not positive definite");
  }
  double acc = 0.0;
  const auto& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < l.rows(); ++i) acc += std::log2(l(i, i).real());
  return 2.0 * acc;
}

double frobenius(const CMatrix& m) { return m.norm(); }

bool all_finite(const CMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}

}  // namespace hdnn
