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

#include "hdnn/evalsim.hpp"

#include "hdnn/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hdnn {

std::pair<int, int> qam4_detect(cplx z) { return {z.real() < 0.0 ? 1 : 0, z.imag() < 0.0 ? 1 : 0}; }

SignalMap linear_map(CMatrix m) {
  return [m = std::move(m)](const CMatrix& x) -> CMatrix { return m * x; };
}

HdnnTransmitter make_hdnn_transmitter(const HdnnModel& model, const AdnnRealization* realization,
                                      std::int64_t n_power_probes, RngStream& rng) {
  if (!model.trained) throw Error(ErrorCode::UntrainedModel, "transmitter model has not been trained");
  if (model.direction != Direction::Downlink)
    throw Error(ErrorCode::InvalidArgument, "make_hdnn_transmitter needs a downlink model");
  if (n_power_probes < 1) throw Error(ErrorCode::InvalidArgument, "need at least one power probe");

  HdnnTransmitter tx;
  SignalMap raw;
  if (realization) {
    tx.cumulative_scale = realization->cumulative_scale;
    raw = [model, real = *realization](const CMatrix& s) { return realized_hdnn_forward(model, real, s); };
  } else {
    raw = [model](const CMatrix& s) { return hdnn_forward(model, s); };
  }

  const CMatrix probes = random_qam4(model.n_s, n_power_probes, rng);
  const double mean_power = raw(probes).squaredNorm() / static_cast<double>(n_power_probes);
  if (!(mean_power > 0.0) || !std::isfinite(mean_power))
    throw Error(ErrorCode::InvalidArgument, "transmitter output has zero or non-finite power");
  tx.power_gain = 1.0 / std::sqrt(mean_power);
  tx.map = [raw, g = tx.power_gain](const CMatrix& s) -> CMatrix { return g * raw(s); };
  return tx;
}

SignalMap make_hdnn_receiver(const HdnnModel& model, const AdnnRealization* realization) {
  if (!model.trained) throw Error(ErrorCode::UntrainedModel, "receiver model has not been trained");
  if (model.direction != Direction::Uplink)
    throw Error(ErrorCode::InvalidArgument, "make_hdnn_receiver needs an uplink model");
  if (realization) {
    return [model, real = *realization](const CMatrix& y) { return realized_hdnn_forward(model, real, y); };
  }
  return [model](const CMatrix& y) { return hdnn_forward(model, y); };
}

double BerResult::std_error() const {
  if (bits == 0) return 0.0;
  const double p = ber();
  return std::sqrt(p * (1.0 - p) / static_cast<double>(bits));
}

namespace {

struct Chunk {
  CMatrix symbols;                 // n_s x B
  std::vector<std::uint8_t> bits;  // 2 per symbol, column-major
  CMatrix noise;                   // n_rx x B
};

Chunk draw_chunk(Eigen::Index n_s, Eigen::Index n_rx, Eigen::Index count, bool noise, RngStream& rng) {
  Chunk c;
  c.symbols.resize(n_s, count);
  c.bits.resize(static_cast<std::size_t>(2 * n_s * count));
  std::size_t b = 0;
  for (Eigen::Index j = 0; j < count; ++j) {
    for (Eigen::Index i = 0; i < n_s; ++i) {
      const std::uint64_t r = rng.next_u64() >> 62;
      const int b0 = static_cast<int>(r >> 1);
      const int b1 = static_cast<int>(r & 1);
      c.bits[b++] = static_cast<std::uint8_t>(b0);
      c.bits[b++] = static_cast<std::uint8_t>(b1);
      c.symbols(i, j) = qam4_map(b0, b1);
    }
  }
  c.noise.resize(n_rx, count);
  for (Eigen::Index j = 0; j < count; ++j) c.noise.col(j) = complex_gaussian(n_rx, rng);
  if (!noise) c.noise.setZero();
  return c;
}

std::int64_t count_errors(const CMatrix& combined, const std::vector<double>& gains, const std::vector<std::uint8_t>& bits) {
  std::int64_t errors = 0;
  std::size_t b = 0;
  for (Eigen::Index j = 0; j < combined.cols(); ++j) {
    for (Eigen::Index i = 0; i < combined.rows(); ++i) {
      const double g = gains[static_cast<std::size_t>(i)];
      const cplx z = g > 0.0 ? combined(i, j) / g : combined(i, j);
      const auto [d0, d1] = qam4_detect(z);
      errors += (d0 != bits[b]) + (d1 != bits[b + 1]);
      b += 2;
    }
  }
  return errors;
}

std::vector<double> stream_gains(const FdPrecoder& fd, double rho) {
  std::vector<double> g(fd.stream_powers.size());
  for (std::size_t k = 0; k < g.size(); ++k)
    g[k] = std::sqrt(rho) * fd.svd.sigma(static_cast<Eigen::Index>(k)) * std::sqrt(fd.stream_powers[k]);
  return g;
}

void check_link(const CMatrix& h, double rho, std::int64_t n_trials, const LinkOptions& opts) {
  if (h.size() == 0) throw Error(ErrorCode::InvalidArgument, "empty channel");
  if (!(rho >= 0.0)) throw Error(ErrorCode::InvalidArgument, "rho must be >= 0");
  if (n_trials < 1) throw Error(ErrorCode::InvalidArgument, "n_trials must be >= 1");
  if (opts.chunk < 1) throw Error(ErrorCode::InvalidArgument, "chunk must be >= 1");
}

}  // namespace

BerResult ber_downlink(const SignalMap& tx, const FdPrecoder& reference, const CMatrix& h, double rho,
                       std::int64_t n_trials, RngStream& rng, const LinkOptions& opts) {
  check_link(h, rho, n_trials, opts);
  const auto n_s = static_cast<Eigen::Index>(reference.stream_powers.size());
  if (reference.p.rows() != h.cols()) throw Error(ErrorCode::DimensionMismatch, "ber_downlink: precoder vs channel");
  const CMatrix ue_combiner = reference.svd.u.leftCols(n_s).adjoint();
  const std::vector<double> gains = stream_gains(reference, rho);
  const double amp = std::sqrt(rho);

  BerResult r;
  for (std::int64_t done = 0; done < n_trials;) {
    const std::int64_t count = std::min(opts.chunk, n_trials - done);
    const Chunk c = draw_chunk(n_s, h.rows(), count, opts.noise, rng);
    const CMatrix x = amp * tx(c.symbols);
    if (x.rows() != h.cols() || x.cols() != count)
      throw Error(ErrorCode::DimensionMismatch, "ber_downlink: transmitter output shape");
    const CMatrix y = h * x + c.noise;
    r.errors += count_errors(ue_combiner * y, gains, c.bits);
    r.bits += 2 * n_s * count;
    done += count;
  }
  return r;
}

BerResult ber_uplink(const SignalMap& rx, const FdPrecoder& ue_precoder, const CMatrix& h, double rho,
                     std::int64_t n_trials, RngStream& rng, const LinkOptions& opts) {
  check_link(h, rho, n_trials, opts);
  const auto n_s = static_cast<Eigen::Index>(ue_precoder.stream_powers.size());
  if (ue_precoder.p.rows() != h.cols()) throw Error(ErrorCode::DimensionMismatch, "ber_uplink: precoder vs channel");
  const std::vector<double> gains = stream_gains(ue_precoder, rho);
  const CMatrix tx = std::sqrt(rho) * ue_precoder.p;

  BerResult r;
  for (std::int64_t done = 0; done < n_trials;) {
    const std::int64_t count = std::min(opts.chunk, n_trials - done);
    const Chunk c = draw_chunk(n_s, h.rows(), count, opts.noise, rng);
    const CMatrix y = h * (tx * c.symbols) + c.noise;
    const CMatrix z = rx(y);
    if (z.rows() != n_s || z.cols() != count)
      throw Error(ErrorCode::DimensionMismatch, "ber_uplink: receiver output shape");
    r.errors += count_errors(z, gains, c.bits);
    r.bits += 2 * n_s * count;
    done += count;
  }
  return r;
}

CMatrix ProbeDistribution::sample(Eigen::Index dim, std::int64_t count, RngStream& rng) const {
  if (kind == ProbeKind::Qam4) return random_qam4(dim, count, rng);
  CMatrix y(dim, count);
  for (std::int64_t j = 0; j < count; ++j) {
    const CVector z = complex_gaussian(dim, rng);
    const CVector n = complex_gaussian(dim, rng);
    y.col(j) = rho * z + n;
  }
  return y;
}

double nmse_db(const SignalMap& f, const CMatrix& reference, const ProbeDistribution& probes, std::int64_t n_probe,
               RngStream& rng) {
  if (n_probe < 1) throw Error(ErrorCode::InvalidArgument, "nmse_db: n_probe must be >= 1");
  const CMatrix s = probes.sample(reference.cols(), n_probe, rng);
  const CMatrix want = reference * s;
  const CMatrix got = f(s);
  if (got.rows() != want.rows() || got.cols() != want.cols())
    throw Error(ErrorCode::DimensionMismatch, "nmse_db: model output shape differs from reference");
  const double num = (got - want).squaredNorm();
  const double den = want.squaredNorm();
  if (!(den > 0.0)) throw Error(ErrorCode::InvalidArgument, "nmse_db: reference output has zero energy");
  if (num == 0.0) return kNmseFloorDb;
  return std::max(kNmseFloorDb, 10.0 * std::log10(num / den));
}

LinearFit fit_effective_linear_map(const SignalMap& f, Eigen::Index input_dim, const ProbeDistribution& probes,
                                   std::int64_t n_probe, RngStream& rng) {
  if (input_dim < 1) throw Error(ErrorCode::InvalidArgument, "fit_effective_linear_map: input_dim must be >= 1");
  if (n_probe < input_dim)
    throw Error(ErrorCode::IllConditioned, "fit_effective_linear_map: " + std::to_string(n_probe) +
                                               " probes cannot determine a map from dimension " +
                                               std::to_string(input_dim));
  const CMatrix s = probes.sample(input_dim, n_probe, rng);
  const CMatrix fs = f(s);
  const CMatrix gram = s * s.adjoint();
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram, Eigen::EigenvaluesOnly);
  const double lmax = eig.eigenvalues().maxCoeff();
  const double lmin = eig.eigenvalues().minCoeff();
  if (!(lmin > 0.0) || lmax / lmin > 1e12)
    throw Error(ErrorCode::IllConditioned, "fit_effective_linear_map: probe Gram matrix is ill-conditioned");

  LinearFit fit;
  // T = F S^H (S S^H)^-1, solved as (S S^H) T^H = S F^H.
  const CMatrix rhs = s * fs.adjoint();
  fit.t = gram.ldlt().solve(rhs).adjoint();
  const double energy = fs.squaredNorm();
  fit.residual = energy > 0.0 ? (fs - fit.t * s).squaredNorm() / energy : 0.0;
  return fit;
}

std::vector<double> se_curve_fd_downlink(const CMatrix& h, int n_s, const std::vector<double>& snr_db) {
  std::vector<double> out;
  out.reserve(snr_db.size());
  for (double db : snr_db) {
    const double rho = db_to_linear(db);
    out.push_back(se_downlink(h, fd_precoder(h, n_s, rho).p, rho));
  }
  return out;
}

std::vector<double> se_curve_precoder(const CMatrix& h, const CMatrix& t, const std::vector<double>& snr_db) {
  const double tr = t.squaredNorm();
  if (!(tr > 0.0)) throw Error(ErrorCode::InvalidArgument, "se_curve_precoder: zero precoder");
  const CMatrix tn = t / std::sqrt(tr);
  std::vector<double> out;
  out.reserve(snr_db.size());
  for (double db : snr_db) out.push_back(se_downlink(h, tn, db_to_linear(db)));
  return out;
}

std::vector<double> se_curve_combiner(const CMatrix& h, const CMatrix& c, const std::vector<double>& snr_db) {
  std::vector<double> out;
  out.reserve(snr_db.size());
  for (double db : snr_db) out.push_back(se_uplink(h, c, db_to_linear(db)));
  return out;
}

std::optional<double> snr_at_ber(const std::vector<double>& snr_db, const std::vector<double>& ber, double target) {
  if (snr_db.size() != ber.size()) throw Error(ErrorCode::DimensionMismatch, "snr_at_ber: grid and curve lengths");
  for (std::size_t i = 0; i + 1 < ber.size(); ++i) {
    if (ber[i] >= target && ber[i + 1] < target) {
      if (ber[i + 1] <= 0.0) {
        // log-interpolation needs a positive lower end; treat it as a step.
        return snr_db[i + 1];
      }
      const double l0 = std::log10(ber[i]);
      const double l1 = std::log10(ber[i + 1]);
      const double lt = std::log10(target);
      return snr_db[i] + (lt - l0) / (l1 - l0) * (snr_db[i + 1] - snr_db[i]);
    }
  }
  return std::nullopt;
}

std::vector<double> parse_snr_grid(const std::string& spec) {
  auto parse_num = [&](const std::string& tok) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tok.size() || !std::isfinite(v))
      throw Error(ErrorCode::InvalidConfig, "snr grid: cannot parse '" + tok + "'");
    return v;
  };

  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string tok; std::getline(ss, tok, ':');) parts.push_back(tok);
    if (parts.size() != 3) throw Error(ErrorCode::InvalidConfig, "snr grid: expected start:step:stop");
    const double start = parse_num(parts[0]);
    const double step = parse_num(parts[1]);
    const double stop = parse_num(parts[2]);
    if (!(step > 0.0) || stop < start) throw Error(ErrorCode::InvalidConfig, "snr grid: need step > 0 and stop >= start");
    const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (long i = 0; i < n; ++i) out.push_back(start + static_cast<double>(i) * step);
  } else {
    std::stringstream ss(spec);
    for (std::string tok; std::getline(ss, tok, ',');) out.push_back(parse_num(tok));
  }
  if (out.empty()) throw Error(ErrorCode::InvalidConfig, "snr grid is empty");
  return out;
}

}  // namespace hdnn
