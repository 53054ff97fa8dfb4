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

#ifndef HDNN_BEAMFORMING_HPP
#define HDNN_BEAMFORMING_HPP

#include "hdnn/numerics.hpp"

#include <vector>

namespace hdnn {

/// Eigen-mode precoder P = V_a diag(sqrt(p)) with water-filled stream powers.
struct FdPrecoder {
  CMatrix p;                          // n_tx x n_s
  SvdFactors svd;                     // of H
  std::vector<double> stream_powers;  // p_k, sums to 1
};

/// Eigen-mode combiner C = U_a^H (rows are the dominant left singular vectors).
struct FdCombiner {
  CMatrix c;  // n_s x n_rx
  SvdFactors svd;
};

/// A = c (R1 + R2) with |R1(p,q)| = |R2(p,q)| = 1.
struct UnitModulusDecomposition {
  double c = 0.0;
  CMatrix r1;
  CMatrix r2;

  CMatrix reconstruct() const { return c * (r1 + r2); }
};

/// Constructive two-phase-shifter split: c = max|A|/2 and
/// R1,2 = exp(j(arg A +- acos(|A|/2c))). Throws AllZeroMatrix when A == 0.
UnitModulusDecomposition decompose_unit_modulus(const CMatrix& a);

FdPrecoder fd_precoder(const CMatrix& h, int n_s, double rho);
FdCombiner fd_combiner(const CMatrix& h, int n_s);

/// log2 det(I + rho H P P^H H^H).
double se_downlink(const CMatrix& h, const CMatrix& p, double rho);

/// log2 det(I + rho (C C^H)^-1 C H H^H C^H). Throws SingularGram when C C^H is
/// not invertible.
double se_uplink(const CMatrix& h, const CMatrix& c, double rho);

}  // namespace hdnn

#endif  // HDNN_BEAMFORMING_HPP
