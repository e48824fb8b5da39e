#include "otfs/ddip.hpp"

#include <ostream>
#include <string>
#include <utility>

namespace otfs {

namespace {

// Reverse-mode pass through a cached forward pass; returns the loss.
double backprop(const DecoderNet& net, const ForwardPass& fp, const RealLinearModel& model,
                Gradients& grads) {
  const RVector residual = model.H * fp.output - model.y;
  const double n = static_cast<double>(fp.output.size());
  const double value = residual.squaredNorm() / n;

  const std::size_t steps = net.weights().size();
  grads.weights.resize(steps);
  grads.biases.resize(steps);

  const RVector& top = fp.activations.back();
  RVector delta = (2.0 * net.c() / n) * (model.H.transpose() * residual);
  delta.array() *= 1.0 - top.array().square();
  for (std::size_t k = steps; k-- > 0;) {
    const RVector& input = fp.activations[k];
    grads.weights[k].noalias() = delta * input.transpose();
    grads.biases[k] = delta;
    if (k > 0) {
      RVector upstream = net.weights()[k].transpose() * delta;
      upstream.array() *= 1.0 - input.array().square();
      delta = std::move(upstream);
    }
  }
  return value;
}

}  // namespace

DecoderNet::DecoderNet(std::vector<int> layer_sizes, std::vector<RMatrix> weights,
                       std::vector<RVector> biases, RVector z0, double c)
    : layer_sizes_(std::move(layer_sizes)),
      weights_(std::move(weights)),
      biases_(std::move(biases)),
      z0_(std::move(z0)),
      c_(c) {
  if (layer_sizes_.size() < 2) throw ParameterError("decoder needs at least two layers");
  const std::size_t steps = layer_sizes_.size() - 1;
  if (weights_.size() != steps || biases_.size() != steps) {
    throw InputSizeError("decoder: expected " + std::to_string(steps) + " weight/bias pairs");
  }
  if (z0_.size() != layer_sizes_.front()) throw InputSizeError("decoder: z0 width mismatch");
  for (std::size_t k = 0; k < steps; ++k) {
    if (weights_[k].rows() != layer_sizes_[k + 1] || weights_[k].cols() != layer_sizes_[k] ||
        biases_[k].size() != layer_sizes_[k + 1]) {
      throw InputSizeError("decoder: layer " + std::to_string(k + 2) + " shape mismatch");
    }
  }
}

DecoderNet DecoderNet::random(std::vector<int> layer_sizes, double c, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  RVector z0(layer_sizes.front());
  for (auto& z : z0) z = gauss(rng);

  std::vector<RMatrix> weights;
  std::vector<RVector> biases;
  for (std::size_t k = 0; k + 1 < layer_sizes.size(); ++k) {
    const int fan_out = layer_sizes[k + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_out));
    std::uniform_real_distribution<double> uniform(-bound, bound);
    RMatrix W(fan_out, layer_sizes[k]);
    for (auto& w : W.reshaped()) w = uniform(rng);
    RVector b(fan_out);
    for (auto& v : b) v = uniform(rng);
    weights.push_back(std::move(W));
    biases.push_back(std::move(b));
  }
  return DecoderNet(std::move(layer_sizes), std::move(weights), std::move(biases), std::move(z0), c);
}

DecoderNet init_net(int M, int N, double c, Rng& rng) {
  if (M < 1 || N < 1) throw ParameterError("decoder requires M >= 1 and N >= 1");
  return DecoderNet::random({4, 8, 16, 32, 2 * M * N}, c, rng);
}

ForwardPass forward_pass(const DecoderNet& net) {
  ForwardPass fp;
  fp.activations.reserve(net.layer_count());
  fp.activations.push_back(net.z0());
  for (std::size_t k = 0; k < net.weights().size(); ++k) {
    RVector pre = net.weights()[k] * fp.activations.back() + net.biases()[k];
    fp.activations.push_back(pre.array().tanh().matrix());
  }
  fp.output = net.c() * fp.activations.back();
  return fp;
}

RVector forward(const DecoderNet& net) { return forward_pass(net).output; }

double loss(const DecoderNet& net, const RealLinearModel& model) {
  const RVector out = forward(net);
  return (model.H * out - model.y).squaredNorm() / static_cast<double>(out.size());
}

double loss_and_gradients(const DecoderNet& net, const RealLinearModel& model, Gradients& grads) {
  return backprop(net, forward_pass(net), model, grads);
}

Gradients gradients(const DecoderNet& net, const RealLinearModel& model) {
  Gradients g;
  loss_and_gradients(net, model, g);
  return g;
}

AdamState AdamState::for_net(const DecoderNet& net, double learning_rate) {
  AdamState s;
  s.learning_rate = learning_rate;
  for (std::size_t k = 0; k < net.weights().size(); ++k) {
    const auto& W = net.weights()[k];
    s.m_weights.push_back(RMatrix::Zero(W.rows(), W.cols()));
    s.v_weights.push_back(RMatrix::Zero(W.rows(), W.cols()));
    s.m_biases.push_back(RVector::Zero(net.biases()[k].size()));
    s.v_biases.push_back(RVector::Zero(net.biases()[k].size()));
  }
  return s;
}

void adam_update(DecoderNet& net, const Gradients& grads, AdamState& adam) {
  ++adam.step;
  const double correction1 = 1.0 - std::pow(adam.beta1, static_cast<double>(adam.step));
  const double correction2 = 1.0 - std::pow(adam.beta2, static_cast<double>(adam.step));
  auto apply = [&](auto& param, const auto& g, auto& m, auto& v) {
    m = adam.beta1 * m + (1.0 - adam.beta1) * g;
    v = adam.beta2 * v + (1.0 - adam.beta2) * g.cwiseAbs2();
    param.array() -= adam.learning_rate * (m.array() / correction1) /
                     ((v.array() / correction2).sqrt() + adam.epsilon);
  };
  for (std::size_t k = 0; k < net.weights().size(); ++k) {
    apply(net.weights()[k], grads.weights[k], adam.m_weights[k], adam.v_weights[k]);
    apply(net.biases()[k], grads.biases[k], adam.m_biases[k], adam.v_biases[k]);
  }
}

StopMonitor::StopMonitor(int window, double threshold) : window_(window), threshold_(threshold) {
  if (window < 1) throw ParameterError("stopping window W must be >= 1");
}

StopDecision StopMonitor::check(const RVector& output) {
  ++iteration_;
  history_.push_back(output);
  if (static_cast<int>(history_.size()) > window_) history_.pop_front();
  if (iteration_ < window_) {
    last_variance_ = NAN;
    return StopDecision::Continue;
  }
  RVector mean = RVector::Zero(output.size());
  for (const auto& x : history_) mean += x;
  mean /= static_cast<double>(window_);
  double spread = 0.0;
  for (const auto& x : history_) spread += (x - mean).squaredNorm();
  last_variance_ = spread / static_cast<double>(window_);
  return last_variance_ < threshold_ ? StopDecision::Stop : StopDecision::Continue;
}

void validate(const DdipConfig& cfg) {
  if (cfg.window < 1) throw ParameterError("W = " + std::to_string(cfg.window) + " violates W >= 1");
  if (!(cfg.epsilon > 0.0)) throw ParameterError("epsilon must be > 0");
  if (!(cfg.learning_rate > 0.0)) throw ParameterError("lr must be > 0");
  if (!(cfg.c > 0.0)) throw ParameterError("c must be > 0");
  if (cfg.max_iterations < cfg.window) {
    throw ParameterError("max_iter = " + std::to_string(cfg.max_iterations) +
                         " violates max_iter >= W = " + std::to_string(cfg.window));
  }
}

DdipResult run_ddip(const RealLinearModel& model, const DdipConfig& cfg, Rng& rng) {
  validate(cfg);
  const int dim = static_cast<int>(model.dim());
  DecoderNet net = DecoderNet::random({4, 8, 16, 32, dim}, cfg.c, rng);
  AdamState adam = AdamState::for_net(net, cfg.learning_rate);
  StopMonitor monitor(cfg.window, cfg.epsilon);
  Gradients grads;

  DdipResult result;
  for (int i = 0;; ++i) {
    ForwardPass fp = forward_pass(net);
    const StopDecision decision = monitor.check(fp.output);
    const bool last = decision == StopDecision::Stop || i >= cfg.max_iterations;
    if (last) {
      if (cfg.record_trace) {
        const double value = (model.H * fp.output - model.y).squaredNorm() / dim;
        result.trace.push_back({i, value, monitor.last_variance()});
      }
      result.iterations = i;
      result.truncated = decision != StopDecision::Stop;
      result.x_init = std::move(fp.output);
      return result;
    }
    const double value = backprop(net, fp, model, grads);
    if (cfg.record_trace) result.trace.push_back({i, value, monitor.last_variance()});
    adam_update(net, grads, adam);
  }
}

void write_loss_trace_csv(std::ostream& os, const std::vector<LossTraceRow>& trace) {
  const auto old_precision = os.precision(10);
  os << "iteration,loss,variance\n";
  for (const auto& row : trace) {
    os << row.iteration << ',' << row.loss << ',';
    if (!std::isnan(row.variance)) os << row.variance;
    os << '\n';
  }
  os.precision(old_precision);
}

}  // namespace otfs
