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

#ifndef HDNN_EVALSIM_HPP
#define HDNN_EVALSIM_HPP

#include "hdnn/beamforming.hpp"
#include "hdnn/hdnn.hpp"
#include "hdnn/trainer.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hdnn {

/// Batch signal map, one column per sample.
using SignalMap = std::function<CMatrix(const CMatrix&)>;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Per-axis sign decision; returns the Gray bit pair (b0, b1).
std::pair<int, int> qam4_detect(cplx z);

SignalMap linear_map(CMatrix m);

struct HdnnTransmitter {
  SignalMap map;            // s -> x with E||x||^2 = 1
  double power_gain = 1.0;  // final normalisation factor
  double cumulative_scale = 1.0;
};

/// Downlink HDNN as a transmitter. With a realisation the phase-shifter network
/// is simulated and its scale divided out; the output is then normalised so
/// that E||g f(s)||^2 = 1 over `n_power_probes` random 4-QAM inputs.
HdnnTransmitter make_hdnn_transmitter(const HdnnModel& model, const AdnnRealization* realization,
                                      std::int64_t n_power_probes, RngStream& rng);

/// Uplink HDNN as a receive combiner y -> s_hat.
SignalMap make_hdnn_receiver(const HdnnModel& model, const AdnnRealization* realization);

struct BerResult {
  std::int64_t errors = 0;
  std::int64_t bits = 0;

  double ber() const { return bits ? static_cast<double>(errors) / static_cast<double>(bits) : 0.0; }
  /// sqrt(p (1 - p) / n_bits)
  double std_error() const;
};

struct LinkOptions {
  bool noise = true;              // false gives the noise-off ablation
  std::int64_t chunk = 1024;      // trials per batch; part of the random-number contract
};

/// Downlink link: x = sqrt(rho) tx(s), y = H x + n, UE applies U_a^H and
/// equalises each stream by sqrt(rho) sigma_k sqrt(p_k) before detection.
/// Randomness consumption does not depend on `tx`, so two transmitters run
/// with equal seeds see identical symbols and noise.
BerResult ber_downlink(const SignalMap& tx, const FdPrecoder& reference, const CMatrix& h, double rho,
                       std::int64_t n_trials, RngStream& rng, const LinkOptions& opts = {});

/// Uplink link: UE sends sqrt(rho) P_ue s, y = H s + n, BS applies `rx`
/// (C y for the FD combiner) and equalises as above.
BerResult ber_uplink(const SignalMap& rx, const FdPrecoder& ue_precoder, const CMatrix& h, double rho,
                     std::int64_t n_trials, RngStream& rng, const LinkOptions& opts = {});

enum class ProbeKind { Qam4, Gaussian };

/// Probe inputs for fidelity measurements: 4-QAM symbol vectors, or the
/// uplink training distribution rho z + n.
struct ProbeDistribution {
  ProbeKind kind = ProbeKind::Qam4;
  double rho = 1.0;

  CMatrix sample(Eigen::Index dim, std::int64_t count, RngStream& rng) const;
};

inline constexpr double kNmseFloorDb = -120.0;

/// 10 log10(E||f(s) - M s||^2 / E||M s||^2), floored at -120 dB.
double nmse_db(const SignalMap& f, const CMatrix& reference, const ProbeDistribution& probes, std::int64_t n_probe,
               RngStream& rng);

struct LinearFit {
  CMatrix t;
  double residual = 0.0;  // ||F - T S||_F^2 / ||F||_F^2
};

/// Least-squares T minimising sum ||f(s_i) - T s_i||^2. Throws IllConditioned
/// when the probe Gram matrix has condition number above 1e12.
LinearFit fit_effective_linear_map(const SignalMap& f, Eigen::Index input_dim, const ProbeDistribution& probes,
                                   std::int64_t n_probe, RngStream& rng);

/// FD eigen-precoder SE, water-filling redone at every SNR.
std::vector<double> se_curve_fd_downlink(const CMatrix& h, int n_s, const std::vector<double>& snr_db);

/// SE of a fixed linear precoder after renormalising it to trace(T T^H) = 1.
std::vector<double> se_curve_precoder(const CMatrix& h, const CMatrix& t, const std::vector<double>& snr_db);

std::vector<double> se_curve_combiner(const CMatrix& h, const CMatrix& c, const std::vector<double>& snr_db);

/// SNR at which a BER curve first falls through `target`, interpolated
/// linearly in (snr_db, log10 ber). nullopt if the grid never brackets it.
std::optional<double> snr_at_ber(const std::vector<double>& snr_db, const std::vector<double>& ber, double target);

/// Parses "start:step:stop" (inclusive) or a comma list.
std::vector<double> parse_snr_grid(const std::string& spec);

struct EvalRecord {
  int channel_id = 0;
  double snr_db = 0.0;
  std::string metric;
  double value = 0.0;
  double std_error = 0.0;
};

struct EvalResult {
  std::vector<EvalRecord> records;
};

}  // namespace hdnn

#endif  // HDNN_EVALSIM_HPP
