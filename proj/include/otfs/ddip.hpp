#pragma once

// Untrained fully connected decoder used as a symbol denoiser.
//
// A fixed Gaussian seed z0 is pushed through tanh layers of widths
// [4, 8, 16, 32, 2MN]; the scaled output c * f_L is fitted to the
// observation by minimizing ||H x - y||^2 / (2MN) with Adam. Fitting stops
// once the windowed variance of successive outputs drops below epsilon, and
// the last output becomes the BPIC starting point.

#include <cmath>
#include <deque>
#include <iosfwd>
#include <vector>

#include "otfs/channel.hpp"
#include "otfs/rng.hpp"
#include "otfs/types.hpp"

namespace otfs {

class DecoderNet {
 public:
  /// weights[l] maps layer l to layer l + 1 and has shape
  /// layer_sizes[l + 1] x layer_sizes[l].
  DecoderNet(std::vector<int> layer_sizes, std::vector<RMatrix> weights,
             std::vector<RVector> biases, RVector z0, double c);

  /// Parameters uniform on (-1/sqrt(p), 1/sqrt(p)) with p the width of the
  /// layer they feed; z0 standard normal.
  static DecoderNet random(std::vector<int> layer_sizes, double c, Rng& rng);

  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  std::size_t layer_count() const { return layer_sizes_.size(); }
  const RVector& z0() const { return z0_; }
  double c() const { return c_; }

  std::vector<RMatrix>& weights() { return weights_; }
  const std::vector<RMatrix>& weights() const { return weights_; }
  std::vector<RVector>& biases() { return biases_; }
  const std::vector<RVector>& biases() const { return biases_; }

 private:
  std::vector<int> layer_sizes_;
  std::vector<RMatrix> weights_;
  std::vector<RVector> biases_;
  RVector z0_;
  double c_;
};

/// Five-layer decoder for an M x N frame.
DecoderNet init_net(int M, int N, double c, Rng& rng);

struct ForwardPass {
  std::vector<RVector> activations;  // f_1 = z0, ..., f_L
  RVector output;                    // c * f_L
};

ForwardPass forward_pass(const DecoderNet& net);
RVector forward(const DecoderNet& net);

double loss(const DecoderNet& net, const RealLinearModel& model);

struct Gradients {
  std::vector<RMatrix> weights;
  std::vector<RVector> biases;
};

Gradients gradients(const DecoderNet& net, const RealLinearModel& model);

/// Loss and gradient from a single forward pass.
double loss_and_gradients(const DecoderNet& net, const RealLinearModel& model, Gradients& grads);

struct AdamState {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step = 0;
  std::vector<RMatrix> m_weights, v_weights;
  std::vector<RVector> m_biases, v_biases;

  /// Zero moments shaped like the net's parameters.
  static AdamState for_net(const DecoderNet& net, double learning_rate = 0.01);
};

void adam_update(DecoderNet& net, const Gradients& grads, AdamState& adam);

enum class StopDecision { Continue, Stop };

/// Windowed output-variance stopping rule. The test stays inactive for the
/// first `window` iterations (i < W); afterwards
///   variance = (1/W) sum ||x_j - mean||^2 over the last W outputs.
class StopMonitor {
 public:
  StopMonitor(int window, double threshold);

  StopDecision check(const RVector& output);

  int window() const { return window_; }
  double threshold() const { return threshold_; }
  /// Index of the most recent output pushed, -1 before the first.
  long iteration() const { return iteration_; }
  /// Variance at the last check; NaN while inactive.
  double last_variance() const { return last_variance_; }

 private:
  int window_;
  double threshold_;
  long iteration_ = -1;
  double last_variance_ = NAN;
  std::deque<RVector> history_;
};

struct DdipConfig {
  int window = 30;
  double epsilon = 1e-3;
  double learning_rate = 0.01;
  int max_iterations = 500;
  double c = 0.7071067811865476;
  bool record_trace = false;
};

/// Throws ParameterError for inconsistent settings (e.g. cap below window).
void validate(const DdipConfig& cfg);

struct LossTraceRow {
  int iteration = 0;
  double loss = 0.0;
  double variance = NAN;
};

struct DdipResult {
  RVector x_init;
  int iterations = 0;  // I, index of the last iteration
  bool truncated = false;
  std::vector<LossTraceRow> trace;
};

/// Fits a fresh decoder (widths [4, 8, 16, 32, dim]) to the model.
DdipResult run_ddip(const RealLinearModel& model, const DdipConfig& cfg, Rng& rng);

/// CSV with header "iteration,loss,variance"; inactive variance left empty.
void write_loss_trace_csv(std::ostream& os, const std::vector<LossTraceRow>& trace);

}  // namespace otfs
