#pragma once

// Flat "key = value" experiment configuration. '#' starts a comment; list
// values are comma separated.
//
//   M, N, P, l_max, k_max, qam       grid and channel (l_max defaults to M-1)
//   snr_db                           list of SNR points in dB ("inf" = noiseless)
//   frames, seed                     Monte Carlo size and RNG seed
//   detectors                        subset of mmse, mmse-bpic, ddip-bpic
//   T                                BPIC iterations
//   W, epsilon, lr, max_iter, c      decoder fitting (c defaults to the QAM unit)
//   complexity_I                     D-DIP iterations assumed by `complexity`
//   trial_frame, trial_snr_db        frame selection for `trial`
//   delta_f, carrier                 metadata only

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "otfs/sim.hpp"

namespace otfs {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LabConfig {
  SimConfig sim;
  int complexity_iterations = 50;
  int trial_frame = 0;
  std::optional<double> trial_snr_db;
};

/// Parses and fills defaults; does not validate cross-key invariants.
LabConfig parse_config(std::istream& is);
LabConfig load_config(const std::filesystem::path& path);

std::vector<Detector> parse_detector_list(const std::string& csv);

}  // namespace otfs
