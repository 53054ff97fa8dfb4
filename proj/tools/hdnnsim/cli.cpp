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

#include "cli.hpp"

#include "pipeline.hpp"
#include "selftest.hpp"

#include "hdnn/beamforming.hpp"
#include "hdnn/error.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace hdnnsim {

using namespace hdnn;
namespace fs = std::filesystem;

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

json read_json(const std::string& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, "'" + path + "' is not valid JSON: " + e.what());
  }
}

struct LoadedChannel {
  ChannelRealization ch;
  int index = 0;
  std::string id;
};

LoadedChannel load_channel(const std::string& path) {
  const json j = read_json(path);
  LoadedChannel c;
  c.ch = io::channel_from_json(j);
  if (j.contains("provenance") && j["provenance"].contains("index")) c.index = j["provenance"]["index"].get<int>();
  c.id = fs::path(path).stem().string();
  return c;
}

// Settings shared by the two evaluation subcommands.
struct EvalArgs {
  std::string channel;
  std::string model;
  std::string out;
  std::string direction = "downlink";
  int n_s = 2;
  std::string snr = "-10:2:10";
  std::int64_t bits = 200000;
  std::int64_t probes = 10000;
  std::uint64_t seed = 0;
  std::optional<double> design_snr_db;
  bool ideal_analog = false;
};

void add_eval_options(CLI::App* cmd, EvalArgs& a) {
  cmd->add_option("--channel", a.channel, "Channel file")->required();
  cmd->add_option("--model", a.model, "Trained model file; FD only when omitted");
  cmd->add_option("--out", a.out, "Output CSV; a JSON summary is written next to it")->required();
  cmd->add_option("--direction", a.direction, "downlink or uplink (taken from the model when given)")
      ->check(CLI::IsMember({"downlink", "uplink"}));
  cmd->add_option("--ns", a.n_s, "Number of streams (taken from the model when given)")->check(CLI::PositiveNumber);
  cmd->add_option("--snr", a.snr, "SNR grid in dB: start:step:stop or a comma list");
  cmd->add_option("--seed", a.seed, "Evaluation seed");
  cmd->add_option("--design-snr-db", a.design_snr_db,
                  "Fixed FD design SNR; defaults to the model's, else re-water-fill per point");
  cmd->add_flag("--ideal-analog", a.ideal_analog, "Use the trained analog network instead of its phase-shifter realisation");
}

struct Prepared {
  LoadedChannel channel;
  std::optional<io::LoadedModel> model;
  EvalSettings settings;
  json config;
  std::string hash;
};

Prepared prepare_eval(const EvalArgs& a, int threads) {
  Prepared p;
  p.channel = load_channel(a.channel);
  EvalSettings& s = p.settings;
  s.direction = direction_from_string(a.direction);
  s.n_s = a.n_s;
  if (!a.model.empty()) {
    p.model = io::hdnn_from_json(read_json(a.model));
    s.direction = p.model->model.direction;
    s.n_s = p.model->model.n_s;
    if (s.direction == Direction::Downlink) s.design_snr_db = p.model->meta.design_snr_db;
  }
  if (a.design_snr_db) s.design_snr_db = a.design_snr_db;
  s.snr_db = parse_snr_grid(a.snr);
  if (a.bits < 1) throw Error(ErrorCode::InvalidConfig, "--bits must be >= 1");
  if (a.probes < 1) throw Error(ErrorCode::InvalidConfig, "--probes must be >= 1");
  s.min_bits = a.bits;
  s.n_probe = a.probes;
  s.seed = a.seed;
  s.use_realization = !a.ideal_analog;
  s.threads = threads;
  s.channel_id = p.channel.index;

  p.config = s.to_json();
  p.config.erase("channel_id");
  p.config["channel"] = {{"id", p.channel.id}, {"seed", p.channel.ch.params.seed}};
  if (p.model) {
    p.config["model"] = {{"config_hash", p.model->meta.training.value("config_hash", "")},
                         {"seeds", p.model->meta.seeds}};
  }
  p.hash = io::config_hash(p.config);
  return p;
}

void write_eval(const Prepared& p, const EvalResult& r, const std::string& out_csv, std::ostream& out) {
  std::ostringstream header;
  header << "config_hash=" << p.hash << " eval_seed=" << p.settings.seed
         << " channel_seed=" << p.channel.ch.params.seed;
  if (p.model) header << " model_seeds=" << p.model->meta.seeds.dump();
  const fs::path csv(out_csv);
  fs::path summary = csv;
  summary.replace_extension(".json");
  if (summary == csv) summary += ".json";
  write_text(csv, io::eval_csv(r, header.str()));
  write_text(summary, io::dump(eval_summary(r, p.config, p.hash)));
  out << "wrote " << csv.string() << " and " << summary.string() << " (config_hash " << p.hash << ")\n";
}

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidPreset:
    case ErrorCode::OddStreams:
      return kExitInvalidConfig;
    default:
      return kExitRuntime;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hybrid analog-digital deep-network beamforming simulator", "hdnnsim"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI file; sections are subcommand names, flags override the file");
  int threads = 1;
  app.add_option("--threads", threads, "Worker threads for evaluation; training is always serial")
      ->check(CLI::Range(1, 256));

  // gen-channel
  ChannelParams cp;
  int n_channels = 1;
  std::uint64_t channel_master = 0;
  double spread_deg = 10.0;
  std::string out_dir = ".";
  std::string prefix = "channel";
  auto* gen = app.add_subcommand("gen-channel", "Draw clustered channels (n_ue x n_bs) and write one file each");
  gen->add_option("--nt", cp.n_tx, "Base-station antennas")->required()->check(CLI::PositiveNumber);
  gen->add_option("--nr", cp.n_rx, "UE antennas")->required()->check(CLI::PositiveNumber);
  gen->add_option("--channels", n_channels, "Number of channels")->check(CLI::PositiveNumber);
  gen->add_option("--seed", channel_master, "Master seed");
  gen->add_option("--clusters", cp.n_clusters, "Clusters")->check(CLI::PositiveNumber);
  gen->add_option("--rays", cp.n_rays, "Rays per cluster")->check(CLI::PositiveNumber);
  gen->add_option("--spread-deg", spread_deg, "Angular spread in degrees")->check(CLI::NonNegativeNumber);
  gen->add_option("--out-dir", out_dir, "Output directory");
  gen->add_option("--prefix", prefix, "File name prefix");

  // train
  TrainSettings ts;
  ts.train.n_samples = 100000;
  std::string train_channel, train_out, preset = "standard", train_direction = "downlink";
  auto* tr = app.add_subcommand("train", "Train an HDNN on one channel");
  tr->add_option("--channel", train_channel, "Channel file")->required();
  tr->add_option("--out", train_out, "Model file")->required();
  tr->add_option("--preset", preset, "standard or half_rf");
  tr->add_option("--direction", train_direction, "downlink or uplink")->check(CLI::IsMember({"downlink", "uplink"}));
  tr->add_option("--ns", ts.n_s, "Number of streams")->check(CLI::PositiveNumber);
  tr->add_option("--nrf", ts.n_rf, "RF chains (0: preset default)")->check(CLI::NonNegativeNumber);
  tr->add_option("--samples", ts.train.n_samples, "Training samples");
  tr->add_option("--epochs", ts.train.epochs, "Epochs");
  tr->add_option("--batch", ts.train.batch_size, "Mini-batch size");
  tr->add_option("--lr", ts.train.learning_rate, "Adam learning rate");
  tr->add_option("--design-snr-db", ts.design_snr_db, "Water-filling SNR (downlink) or training rho (uplink)");
  tr->add_option("--seed", ts.seed, "Master seed for init, data and shuffling");

  // eval-ber / eval-se
  EvalArgs ber_args, se_args;
  auto* eb = app.add_subcommand("eval-ber", "BER of FD and (optionally) HDNN under common random numbers");
  add_eval_options(eb, ber_args);
  eb->add_option("--bits", ber_args.bits, "Minimum bits per SNR point");
  auto* es = app.add_subcommand("eval-se", "Spectral efficiency of FD and the HDNN's effective linear map");
  add_eval_options(es, se_args);
  es->add_option("--probes", se_args.probes, "Probe count for the linear fit");

  // decompose-check
  std::string matrix_path, decompose_out;
  auto* dc = app.add_subcommand("decompose-check", "Unit-modulus decomposition of a matrix file");
  dc->add_option("--matrix", matrix_path, "JSON matrix {rows, cols, data}")->required();
  dc->add_option("--out", decompose_out, "Write the report here instead of stdout");

  // selftest
  unsigned long long selftest_seed = 1;
  std::string inject;
  auto* st = app.add_subcommand("selftest", "Fast invariant suite");
  st->add_option("--seed", selftest_seed, "Seed for the random instances");
  st->add_option("--inject-failure", inject, "Test hook: force the named invariant to fail");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "InvalidConfig: " << e.what() << "\n";
    return kExitInvalidConfig;
  }

  try {
    if (gen->parsed()) {
      cp.spread = spread_deg * kPi / 180.0;
      json config = io::channel_params_to_json(cp);
      config.erase("seed");
      config["master_seed"] = channel_master;
      config["channels"] = n_channels;
      const std::string hash = io::config_hash(config);
      for (int k = 0; k < n_channels; ++k) {
        ChannelParams p = cp;
        p.seed = channel_seed(channel_master, k);
        json j = io::channel_to_json(generate_channel(p));
        j["provenance"] = {{"config", config}, {"config_hash", hash}, {"master_seed", channel_master}, {"index", k}};
        const fs::path path = fs::path(out_dir) / (prefix + "_" + std::to_string(k) + ".json");
        write_text(path, io::dump(j));
        out << path.string() << "\n";
      }
      return kExitOk;
    }

    if (tr->parsed()) {
      ts.preset = preset_from_string(preset);
      ts.direction = direction_from_string(train_direction);
      ts.train.validate();
      const LoadedChannel c = load_channel(train_channel);
      const TrainedModel m = train_on_channel(c.ch, c.id, ts, [&](int epoch, double loss) {
        err << "epoch " << epoch + 1 << "/" << ts.train.epochs << " loss " << loss << "\n";
      });
      write_text(train_out, io::dump(m.document()));
      json summary = {{"model", train_out},
                      {"config_hash", m.config_hash},
                      {"final_loss", m.result.final_loss},
                      {"nmse_db", m.train_nmse_db},
                      {"seeds", m.meta.seeds}};
      out << summary.dump() << "\n";
      return kExitOk;
    }

    if (eb->parsed()) {
      const Prepared p = prepare_eval(ber_args, threads);
      const EvalResult r = eval_ber(p.channel.ch.h, p.model ? &*p.model : nullptr, p.settings);
      write_eval(p, r, ber_args.out, out);
      return kExitOk;
    }

    if (es->parsed()) {
      const Prepared p = prepare_eval(se_args, threads);
      const EvalResult r = eval_se(p.channel.ch.h, p.model ? &*p.model : nullptr, p.settings);
      write_eval(p, r, se_args.out, out);
      return kExitOk;
    }

    if (dc->parsed()) {
      const CMatrix a = io::matrix_from_json(read_json(matrix_path));
      const UnitModulusDecomposition d = decompose_unit_modulus(a);
      const double modulus_dev = std::max((d.r1.cwiseAbs().array() - 1.0).abs().maxCoeff(),
                                          (d.r2.cwiseAbs().array() - 1.0).abs().maxCoeff());
      const json report = {{"rows", a.rows()},
                           {"cols", a.cols()},
                           {"c", d.c},
                           {"r1_phases", io::phases_to_json(d.r1)},
                           {"r2_phases", io::phases_to_json(d.r2)},
                           {"reconstruction_error", (a - d.c * (d.r1 + d.r2)).norm()},
                           {"max_modulus_deviation", modulus_dev},
                           {"config_hash", io::config_hash({{"matrix", io::matrix_to_json(a)}})}};
      if (decompose_out.empty())
        out << io::dump(report);
      else
        write_text(decompose_out, io::dump(report));
      return kExitOk;
    }

    if (st->parsed()) {
      if (!inject.empty()) {
        const auto names = selftest_invariants();
        if (std::find(names.begin(), names.end(), inject) == names.end())
          throw Error(ErrorCode::InvalidConfig, "--inject-failure: unknown invariant '" + inject + "'");
      }
      bool all = true;
      for (const InvariantResult& r : run_selftest(selftest_seed, inject)) {
        out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
        all = all && r.passed;
      }
      out << (all ? "selftest passed" : "selftest FAILED") << " (seed " << selftest_seed << ")\n";
      return all ? kExitOk : kExitSelftestFailed;
    }
  } catch (const Error& e) {
    err << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitInvalidConfig;
}

}  // namespace hdnnsim
