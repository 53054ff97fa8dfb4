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

#ifndef HDNN_NUMERICS_HPP
#define HDNN_NUMERICS_HPP

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace hdnn {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

/// Seeded random stream. Identical seeds give identical sequences on every
/// platform: the engine is mt19937_64 (fully specified by the standard) and
/// every transform to floating point is implemented here rather than through
/// the implementation-defined <random> distributions.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_open() {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  /// Standard real normal (Box-Muller, second variate cached).
  double normal();

  /// Child stream for task `index`; independent of how much of this stream
  /// has already been consumed.
  RngStream split(std::uint64_t index) const { return RngStream(child_seed(seed_, index)); }

  static std::uint64_t child_seed(std::uint64_t parent, std::uint64_t index);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

/// n i.i.d. CN(0, 1) samples: real and imaginary parts each N(0, 1/2).
CVector complex_gaussian(Eigen::Index n, RngStream& rng);

/// Laplacian sample whose standard deviation equals `spread` (scale b = spread/sqrt(2)).
double laplacian_angle(double mean, double spread, RngStream& rng);

struct SvdFactors {
  CMatrix u;      // m x r, orthonormal columns
  RVector sigma;  // length r, non-increasing, >= 0
  CMatrix v;      // n x r, orthonormal columns

  CMatrix reconstruct() const;
};

struct SvdOptions {
  double tolerance = 1e-12;
  int max_sweeps = 100;
};

/// Thin SVD by one-sided (Hestenes) complex Jacobi. r = min(rows, cols).
/// The largest-modulus entry of every right singular vector is made real and
/// nonnegative so the factors are deterministic.
SvdFactors svd(const CMatrix& a, const SvdOptions& opts = {});

/// Water-filling over channel gains: p_k = max(mu - 1/g_k, 0), sum p_k = budget.
std::vector<double> water_fill(std::span<const double> gains, double budget);

/// Water level mu found by the same bisection water_fill uses.
double water_level(std::span<const double> gains, double budget);

/// log2 det of a Hermitian positive-definite matrix.
double log2_det_hpd(const CMatrix& m);

double frobenius(const CMatrix& m);

bool all_finite(const CMatrix& m);

}  // namespace hdnn

#endif  // HDNN_NUMERICS_HPP
