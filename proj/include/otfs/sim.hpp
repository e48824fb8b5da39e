#pragma once

// Monte Carlo link-level harness. Every (SNR, frame) trial draws its bits,
// channel, noise and decoder seed from substreams keyed by (seed, frame), so
// all detectors in a trial see the same realization, the same frame index
// sees the same channel at every SNR, and results do not depend on thread
// count.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "otfs/bpic.hpp"
#include "otfs/channel.hpp"
#include "otfs/dd_frame.hpp"
#include "otfs/ddip.hpp"

namespace otfs {

enum class Detector { Mmse, MmseBpic, DdipBpic };

std::string_view detector_name(Detector d);
/// Accepts "mmse", "mmse-bpic", "ddip-bpic".
Detector parse_detector(std::string_view name);

struct SimConfig {
  int M = 12;
  int N = 7;
  int P = 6;
  int l_max = 11;
  int k_max = 3;
  int qam = 4;
  std::vector<double> snr_db{10.0, 12.5, 15.0, 17.5};
  int frames = 1000;
  std::vector<Detector> detectors{Detector::Mmse, Detector::MmseBpic, Detector::DdipBpic};
  int T = 10;
  DdipConfig ddip;
  std::uint64_t seed = 1;
  // Recorded with results; neither enters the discrete model.
  double delta_f_hz = 15e3;
  double carrier_hz = 10e9;

  bool uses(Detector d) const;
};

/// Throws ParameterError naming the first violated constraint.
void validate(const SimConfig& cfg);

struct Frame {
  DDGrid symbols;
  std::vector<int> labels;
  ChannelRealization channel;
  RealLinearModel model;
};

/// One transmitted frame pushed through the time-domain pipeline.
Frame make_frame(const SimConfig& cfg, double snr_db, std::uint64_t frame_index);

int count_symbol_errors(const std::vector<int>& decided, const std::vector<int>& truth);

struct DetectorOutcome {
  Detector detector;
  int symbol_errors = 0;
  double seconds = 0.0;
  std::vector<int> decided;
};

struct TrialResult {
  std::uint64_t frame_index = 0;
  std::vector<DetectorOutcome> outcomes;  // in cfg.detectors order
  int ddip_iterations = -1;
  bool ddip_truncated = false;
  std::vector<LossTraceRow> loss_trace;

  const DetectorOutcome* find(Detector d) const;
};

/// Runs every configured detector on frame `frame_index`.
TrialResult run_trial(const SimConfig& cfg, double snr_db, std::uint64_t frame_index);
TrialResult run_trial(const SimConfig& cfg, const Frame& frame, std::uint64_t frame_index);

/// Error raised inside a trial, tagged with where it happened.
class TrialError : public std::runtime_error {
 public:
  TrialError(double snr_db, std::uint64_t frame_index, const std::string& what);
  double snr_db;
  std::uint64_t frame_index;
};

struct SerPoint {
  Detector detector;
  double snr_db = 0.0;
  long frames = 0;
  long long symbol_errors = 0;
  long long symbols = 0;
  double ser = 0.0;
  double ci_low = 0.0;  // 95% Wilson interval
  double ci_high = 0.0;
  double ci_halfwidth = 0.0;
};

struct WilsonInterval {
  double low;
  double high;
  double halfwidth;
};

WilsonInterval wilson_interval(long long successes, long long trials, double z = 1.959963984540054);

struct SweepResult {
  std::vector<SerPoint> points;  // SNR-major, detectors in cfg order
  std::vector<double> snr_db;
  /// Stopping iteration per frame for each SNR; empty without ddip-bpic.
  std::vector<std::vector<int>> ddip_iterations;
  std::vector<std::vector<bool>> ddip_truncated;

  const SerPoint* find(Detector d, double snr_db) const;
};

/// Frame-parallel sweep (OpenMP).
SweepResult run_sweep(const SimConfig& cfg);
/// Single-threaded reference with identical results.
SweepResult run_sweep_serial(const SimConfig& cfg);
/// Aggregation shared by both sweeps; trials laid out SNR-major.
SweepResult aggregate(const SimConfig& cfg, const std::vector<TrialResult>& trials);

/// Empirical CDF of stopping iterations, pooled over all SNRs or for one
/// SNR index. Throws ParameterError when no ddip-bpic data was recorded.
std::vector<std::pair<int, double>> iteration_cdf(const SweepResult& sweep,
                                                  std::optional<std::size_t> snr_index = std::nullopt);

double median_iterations(const SweepResult& sweep, std::optional<std::size_t> snr_index = std::nullopt);
double mean_iterations(const SweepResult& sweep, std::optional<std::size_t> snr_index = std::nullopt);

// Deployment-cost orders (in multiply-accumulate units, constants dropped):
//   MMSE-BPIC, UAMP: (MN)^3 + (MN)^2 T
//   EP:              (MN)^3 T
//   BPICNet:         (MN)^3 + MN + (MN)^2 T
//   D-DIP-BPIC:      (MN)^2 I + (MN)^2 T
struct ComplexityEntry {
  std::string detector;
  std::uint64_t operations = 0;
  /// operations / D-DIP-BPIC operations; NaN if the latter is zero.
  double ratio_to_ddip = 0.0;
};

struct ComplexityReport {
  int M = 0, N = 0, T = 0, I = 0;
  std::vector<ComplexityEntry> entries;

  const ComplexityEntry& at(std::string_view detector) const;
};

ComplexityReport complexity_report(int M, int N, int T, int I);

/// Header: detector,snr_db,frames,symbol_errors,ser,ci_halfwidth
void write_sweep_csv(std::ostream& os, const SweepResult& sweep);
/// Header: I,cum_fraction
void write_cdf_csv(std::ostream& os, const std::vector<std::pair<int, double>>& cdf);
void write_complexity_csv(std::ostream& os, const ComplexityReport& report);

}  // namespace otfs
