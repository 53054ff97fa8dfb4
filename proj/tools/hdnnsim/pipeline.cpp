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

#include "pipeline.hpp"

#include "hdnn/beamforming.hpp"
#include "hdnn/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace hdnnsim {

using namespace hdnn;

namespace {

// Child-stream indices. Changing any of these changes every result.
constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kDataStream = 1;
constexpr std::uint64_t kShuffleStream = 2;
constexpr std::uint64_t kProbeStream = 3;
constexpr std::uint64_t kPowerStream = 1ULL << 32;
constexpr std::uint64_t kFitStream = (1ULL << 32) + 1;

// Runs task(i) for i in [0, n) on up to `threads` workers. Each task owns its
// output slot, so the merge order is fixed by index.
template <typename F>
void parallel_for(std::size_t n, int threads, F task) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::int64_t trials_for(std::int64_t min_bits, int n_s) {
  const std::int64_t per_trial = 2 * static_cast<std::int64_t>(n_s);
  return (min_bits + per_trial - 1) / per_trial;
}

void check_model(const io::LoadedModel& m, const EvalSettings& s, const CMatrix& h_link) {
  if (m.model.direction != s.direction)
    throw Error(ErrorCode::InvalidConfig, "model direction differs from the requested direction");
  if (m.model.n_s != s.n_s) throw Error(ErrorCode::InvalidConfig, "model n_s differs from --ns");
  const Eigen::Index ant = s.direction == Direction::Downlink ? h_link.cols() : h_link.rows();
  if (m.model.n_antennas != ant) throw Error(ErrorCode::DimensionMismatch, "model antennas differ from the channel");
}

}  // namespace

CMatrix link_channel(const CMatrix& h_downlink, Direction d) {
  if (d == Direction::Downlink) return h_downlink;
  return h_downlink.transpose();
}

std::uint64_t channel_seed(std::uint64_t master, int index) {
  return RngStream::child_seed(master, static_cast<std::uint64_t>(index));
}

json TrainSettings::to_json() const {
  return {{"preset", std::string(to_string(preset))},
          {"direction", std::string(to_string(direction))},
          {"n_s", n_s},
          {"n_rf", n_rf},
          {"design_snr_db", design_snr_db},
          {"samples", train.n_samples},
          {"batch_size", train.batch_size},
          {"epochs", train.epochs},
          {"learning_rate", train.learning_rate},
          {"seed", seed}};
}

CMatrix target_map(const CMatrix& h_link, Direction d, int n_s, double design_snr_db) {
  if (d == Direction::Downlink) return fd_precoder(h_link, n_s, db_to_linear(design_snr_db)).p;
  return fd_combiner(h_link, n_s).c;
}

TrainedModel train_on_channel(const ChannelRealization& ch, const std::string& channel_id, const TrainSettings& s,
                              const EpochCallback& on_epoch) {
  const CMatrix h = link_channel(ch.h, s.direction);
  const int n_ant = static_cast<int>(s.direction == Direction::Downlink ? h.cols() : h.rows());

  // Architecture errors (odd streams, bad preset) come before channel-rank ones.
  const RngStream master(s.seed);
  RngStream init = master.split(kInitStream);
  RngStream data_rng = master.split(kDataStream);
  const HdnnModel model = build_hdnn(s.preset, s.direction, n_ant, s.n_s, s.n_rf, init);
  const CMatrix target = target_map(h, s.direction, s.n_s, s.design_snr_db);

  Dataset data = s.direction == Direction::Downlink
                     ? make_downlink_dataset(target, s.train.n_samples, data_rng)
                     : make_uplink_dataset(target, db_to_linear(s.design_snr_db), s.train.n_samples, data_rng);
  data.channel_id = channel_id;

  TrainConfig cfg = s.train;
  cfg.seed = master.split(kShuffleStream).seed();

  TrainedModel out;
  out.result = train(model, data, cfg, on_epoch);
  out.realization = realize_adnn(out.result.model.analog);

  ProbeDistribution probes;
  if (s.direction == Direction::Uplink) probes = {ProbeKind::Gaussian, db_to_linear(s.design_snr_db)};
  RngStream probe_rng = master.split(kProbeStream);
  const HdnnModel& trained = out.result.model;
  out.train_nmse_db =
      nmse_db([&](const CMatrix& x) { return hdnn_forward(trained, x); }, target, probes, 10000, probe_rng);

  const json settings = s.to_json();
  out.config_hash = io::config_hash(settings);
  out.meta.preset_name = std::string(to_string(s.preset));
  out.meta.channel_id = channel_id;
  out.meta.design_snr_db = s.design_snr_db;
  out.meta.seeds = {{"master", s.seed},
                    {"init", init.seed()},
                    {"data", data_rng.seed()},
                    {"shuffle", cfg.seed},
                    {"channel", ch.params.seed}};
  out.meta.training = {{"config", settings},
                       {"config_hash", out.config_hash},
                       {"epoch_loss", out.result.epoch_loss},
                       {"final_loss", out.result.final_loss},
                       {"nmse_db", out.train_nmse_db}};
  return out;
}

json TrainedModel::document() const { return io::hdnn_to_json(result.model, meta, &realization); }

json EvalSettings::to_json() const {
  json j = {{"direction", std::string(to_string(direction))},
            {"n_s", n_s},
            {"snr_db", snr_db},
            {"min_bits", min_bits},
            {"n_probe", n_probe},
            {"seed", seed},
            {"use_realization", use_realization},
            {"channel_id", channel_id}};
  j["design_snr_db"] = design_snr_db ? json(*design_snr_db) : json(nullptr);
  return j;
}

EvalResult eval_ber(const CMatrix& h_downlink, const io::LoadedModel* model, const EvalSettings& s) {
  if (s.snr_db.empty()) throw Error(ErrorCode::InvalidConfig, "empty SNR grid");
  const CMatrix h = link_channel(h_downlink, s.direction);
  if (model) check_model(*model, s, h);
  const RngStream master(s.seed);
  const std::int64_t trials = trials_for(s.min_bits, s.n_s);
  const AdnnRealization* real = model && s.use_realization && model->realization ? &*model->realization : nullptr;

  // Built once so every SNR point sees the same transmitter normalisation.
  SignalMap hdnn_map;
  if (model) {
    if (s.direction == Direction::Downlink) {
      RngStream power_rng = master.split(kPowerStream);
      hdnn_map = make_hdnn_transmitter(model->model, real, s.n_probe, power_rng).map;
    } else {
      hdnn_map = make_hdnn_receiver(model->model, real);
    }
  }

  struct Cell {
    BerResult fd, hd;
  };
  std::vector<Cell> cells(s.snr_db.size());
  parallel_for(cells.size(), s.threads, [&](std::size_t i) {
    const double rho = db_to_linear(s.snr_db[i]);
    if (s.direction == Direction::Downlink) {
      const FdPrecoder fd = fd_precoder(h, s.n_s, db_to_linear(s.design_snr_db.value_or(s.snr_db[i])));
      RngStream a = master.split(i);
      cells[i].fd = ber_downlink(linear_map(fd.p), fd, h, rho, trials, a);
      if (model) {
        RngStream b = master.split(i);
        cells[i].hd = ber_downlink(hdnn_map, fd, h, rho, trials, b);
      }
    } else {
      const FdPrecoder ue = fd_precoder(h, s.n_s, rho);
      const FdCombiner c = fd_combiner(h, s.n_s);
      RngStream a = master.split(i);
      cells[i].fd = ber_uplink(linear_map(c.c), ue, h, rho, trials, a);
      if (model) {
        RngStream b = master.split(i);
        cells[i].hd = ber_uplink(hdnn_map, ue, h, rho, trials, b);
      }
    }
  });

  EvalResult r;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    r.records.push_back({s.channel_id, s.snr_db[i], "ber_fd", cells[i].fd.ber(), cells[i].fd.std_error()});
    if (model)
      r.records.push_back({s.channel_id, s.snr_db[i], "ber_hdnn", cells[i].hd.ber(), cells[i].hd.std_error()});
  }
  return r;
}

EvalResult eval_se(const CMatrix& h_downlink, const io::LoadedModel* model, const EvalSettings& s) {
  if (s.snr_db.empty()) throw Error(ErrorCode::InvalidConfig, "empty SNR grid");
  const CMatrix h = link_channel(h_downlink, s.direction);
  if (model) check_model(*model, s, h);

  std::vector<double> fd, fd_opt, hd;
  double residual = 0.0;
  if (s.direction == Direction::Downlink) {
    fd_opt = se_curve_fd_downlink(h, s.n_s, s.snr_db);
    fd = s.design_snr_db ? se_curve_precoder(h, fd_precoder(h, s.n_s, db_to_linear(*s.design_snr_db)).p, s.snr_db)
                         : fd_opt;
  } else {
    fd = se_curve_combiner(h, fd_combiner(h, s.n_s).c, s.snr_db);
    fd_opt = fd;
  }

  if (model) {
    const AdnnRealization* real = s.use_realization && model->realization ? &*model->realization : nullptr;
    const HdnnModel& m = model->model;
    SignalMap f;
    ProbeDistribution probes;
    if (real) {
      // The realised network carries a known scale; the fit is scale-free anyway.
      f = [&m, real](const CMatrix& x) { return realized_hdnn_forward(m, *real, x); };
    } else {
      f = [&m](const CMatrix& x) { return hdnn_forward(m, x); };
    }
    if (s.direction == Direction::Uplink) probes = {ProbeKind::Gaussian, db_to_linear(model->meta.design_snr_db)};
    RngStream fit_rng = RngStream(s.seed).split(kFitStream);
    const LinearFit fit = fit_effective_linear_map(f, m.input_dim(), probes, s.n_probe, fit_rng);
    residual = fit.residual;
    hd = s.direction == Direction::Downlink ? se_curve_precoder(h, fit.t, s.snr_db) : se_curve_combiner(h, fit.t, s.snr_db);
  }

  EvalResult r;
  for (std::size_t i = 0; i < s.snr_db.size(); ++i) {
    r.records.push_back({s.channel_id, s.snr_db[i], "se_fd", fd[i], 0.0});
    r.records.push_back({s.channel_id, s.snr_db[i], "se_fd_opt", fd_opt[i], 0.0});
    if (model) {
      r.records.push_back({s.channel_id, s.snr_db[i], "se_hdnn_lin", hd[i], 0.0});
      r.records.push_back({s.channel_id, s.snr_db[i], "fit_residual", residual, 0.0});
    }
  }
  return r;
}

std::vector<double> column(const EvalResult& r, const std::string& metric, std::vector<double>* snr) {
  std::vector<double> v;
  if (snr) snr->clear();
  for (const EvalRecord& rec : r.records) {
    if (rec.metric != metric) continue;
    v.push_back(rec.value);
    if (snr) snr->push_back(rec.snr_db);
  }
  return v;
}

json eval_summary(const EvalResult& r, const json& config, const std::string& config_hash) {
  json records = json::array();
  for (const EvalRecord& rec : r.records)
    records.push_back({{"channel_id", rec.channel_id},
                       {"snr_db", rec.snr_db},
                       {"metric", rec.metric},
                       {"value", rec.value},
                       {"stderr", rec.std_error}});
  json summary = {{"format", "hdnn.eval"},
                  {"version", io::kFormatVersion},
                  {"config", config},
                  {"config_hash", config_hash},
                  {"records", records}};
  json crossings = json::object();
  for (const char* metric : {"ber_fd", "ber_hdnn"}) {
    std::vector<double> snr;
    const std::vector<double> ber = column(r, metric, &snr);
    if (ber.empty()) continue;
    const auto at = snr_at_ber(snr, ber, 1e-3);
    crossings[metric] = at ? json(*at) : json(nullptr);
  }
  if (!crossings.empty()) summary["snr_at_ber_1e-3"] = crossings;
  return summary;
}

}  // namespace hdnnsim
