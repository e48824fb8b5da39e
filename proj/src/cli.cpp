#include "otfs/cli.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

namespace otfs::cli {

namespace {

namespace fs = std::filesystem;

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

// Writes each output through a temporary file and renames it into place;
// on destruction without commit() every file it produced is removed.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;
  ~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& p : written_) fs::remove(p, ec);
  }

  fs::path write(const std::string& name, const std::function<void(std::ostream&)>& fill) {
    const fs::path final_path = dir_ / name;
    const fs::path tmp = dir_ / (name + ".part");
    written_.push_back(tmp);
    {
      std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
      if (!os) throw std::runtime_error("cannot write " + tmp.string());
      fill(os);
      os.flush();
      if (!os) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, final_path);
    written_.back() = final_path;
    return final_path;
  }

  void commit() { committed_ = true; }

 private:
  fs::path dir_;
  std::vector<fs::path> written_;
  bool committed_ = false;
};

void print_sweep(std::ostream& out, const SweepResult& sweep) {
  for (const auto& p : sweep.points) {
    out << detector_name(p.detector) << " snr_db=" << fmt("%g", p.snr_db) << " ser="
        << fmt("%.4e", p.ser) << " +/-" << fmt("%.1e", p.ci_halfwidth) << " (" << p.symbol_errors
        << "/" << p.symbols << ")\n";
  }
}

}  // namespace

Invocation parse_and_validate(int argc, const char* const* argv) {
  CLI::App app{"OTFS delay-Doppler detection lab"};
  app.require_subcommand(1);

  Invocation inv;
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  std::string detectors;
  std::vector<CLI::Option*> seed_options;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config (key = value)")->required();
    sub->add_option("--out", out_dir, "output directory");
    seed_options.push_back(sub->add_option("--seed", seed, "override the config seed"));
    sub->add_option("--detectors", detectors, "comma list: mmse,mmse-bpic,ddip-bpic");
  };
  auto* sweep = app.add_subcommand("sweep", "SER sweep over the configured SNR points");
  auto* cdf = app.add_subcommand("cdf", "CDF of D-DIP stopping iterations");
  auto* trial = app.add_subcommand("trial", "single frame with channel and loss-trace dumps");
  auto* complexity = app.add_subcommand("complexity", "deployment complexity orders and ratios");
  for (auto* sub : {sweep, cdf, trial, complexity}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw InformationalExit(app.help());
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  if (sweep->parsed()) inv.subcommand = Subcommand::Sweep;
  else if (cdf->parsed()) inv.subcommand = Subcommand::Cdf;
  else if (trial->parsed()) inv.subcommand = Subcommand::Trial;
  else inv.subcommand = Subcommand::Complexity;

  inv.config_path = config_path;
  inv.out_dir = out_dir;
  try {
    inv.config = load_config(inv.config_path);
    if (!detectors.empty()) {
      inv.detectors = parse_detector_list(detectors);
      inv.config.sim.detectors = *inv.detectors;
    }
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  for (const auto* opt : seed_options) {
    if (opt->count() > 0) {
      inv.seed = seed;
      inv.config.sim.seed = seed;
    }
  }

  try {
    validate(inv.config.sim);
  } catch (const ParameterError& e) {
    throw UsageError(std::string("invalid config: ") + e.what());
  }
  if (inv.config.complexity_iterations < 0) throw UsageError("invalid config: complexity_I must be >= 0");
  if (inv.config.trial_frame < 0) throw UsageError("invalid config: trial_frame must be >= 0");
  if (inv.subcommand == Subcommand::Cdf && !inv.config.sim.uses(Detector::DdipBpic)) {
    throw UsageError("cdf requires ddip-bpic among the detectors");
  }
  std::error_code ec;
  if (fs::exists(inv.out_dir, ec) && !fs::is_directory(inv.out_dir, ec)) {
    throw UsageError("output path is not a directory: " + inv.out_dir.string());
  }
  return inv;
}

int dispatch(const Invocation& inv, std::ostream& out, std::ostream& err) {
  try {
    fs::create_directories(inv.out_dir);
    OutputSet outputs(inv.out_dir);
    const SimConfig& cfg = inv.config.sim;

    switch (inv.subcommand) {
      case Subcommand::Sweep: {
        const SweepResult sweep = run_sweep(cfg);
        outputs.write("ser.csv", [&](std::ostream& os) { write_sweep_csv(os, sweep); });
        print_sweep(out, sweep);
        break;
      }
      case Subcommand::Cdf: {
        SimConfig only = cfg;
        only.detectors = {Detector::DdipBpic};
        const SweepResult sweep = run_sweep(only);
        const auto cdf = iteration_cdf(sweep);
        outputs.write("iteration_cdf.csv", [&](std::ostream& os) { write_cdf_csv(os, cdf); });
        for (std::size_t s = 0; s < sweep.snr_db.size(); ++s) {
          out << "ddip-bpic snr_db=" << fmt("%g", sweep.snr_db[s])
              << " median_I=" << fmt("%g", median_iterations(sweep, s))
              << " mean_I=" << fmt("%.2f", mean_iterations(sweep, s)) << "\n";
        }
        break;
      }
      case Subcommand::Trial: {
        SimConfig traced = cfg;
        traced.ddip.record_trace = true;
        const double snr = inv.config.trial_snr_db.value_or(cfg.snr_db.front());
        const auto frame_index = static_cast<std::uint64_t>(inv.config.trial_frame);
        const Frame frame = make_frame(traced, snr, frame_index);
        const TrialResult result = run_trial(traced, frame, frame_index);
        outputs.write("channel.txt", [&](std::ostream& os) { write_channel(os, frame.channel); });
        if (traced.uses(Detector::DdipBpic)) {
          outputs.write("loss_trace.csv",
                        [&](std::ostream& os) { write_loss_trace_csv(os, result.loss_trace); });
        }
        for (const auto& p : frame.channel.paths) {
          out << "path l=" << p.delay_index << " k=" << p.doppler_index
              << " delay_us=" << fmt("%.4g", 1e6 * p.delay_seconds(cfg.M, cfg.delta_f_hz))
              << " doppler_hz=" << fmt("%.4g", p.doppler_hz(cfg.N, cfg.delta_f_hz))
              << " |h|=" << fmt("%.4f", std::abs(p.gain)) << "\n";
        }
        for (const auto& o : result.outcomes) {
          out << detector_name(o.detector) << " snr_db=" << fmt("%g", snr) << " frame=" << frame_index
              << " symbol_errors=" << o.symbol_errors << "/" << frame.labels.size() << "\n";
        }
        if (result.ddip_iterations >= 0) {
          out << "ddip iterations I=" << result.ddip_iterations
              << (result.ddip_truncated ? " (cap reached)" : "") << "\n";
        }
        break;
      }
      case Subcommand::Complexity: {
        const ComplexityReport report =
            complexity_report(cfg.M, cfg.N, cfg.T, inv.config.complexity_iterations);
        outputs.write("complexity.csv", [&](std::ostream& os) { write_complexity_csv(os, report); });
        out << "M=" << report.M << " N=" << report.N << " T=" << report.T << " I=" << report.I << "\n";
        for (const auto& e : report.entries) {
          out << e.detector << " operations=" << e.operations << "\n";
        }
        out << "ep / ddip-bpic = " << fmt("%.2f", report.at("ep").ratio_to_ddip) << "\n";
        out << "mmse-bpic / ddip-bpic = " << fmt("%.2f", report.at("mmse-bpic").ratio_to_ddip) << "\n";
        break;
      }
    }
    outputs.commit();
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(parse_and_validate(argc, argv), out, err);
  } catch (const InformationalExit& info) {
    out << info.what();
    return 0;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return e.exit_code;
  }
}

}  // namespace otfs::cli
