#include "otfs/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <ostream>

#include <omp.h>

namespace otfs {

namespace {

std::string fmt_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

std::string fmt_general(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<int> collect_iterations(const SweepResult& sweep, std::optional<std::size_t> snr_index) {
  if (sweep.ddip_iterations.empty()) {
    throw ParameterError("no ddip-bpic stopping iterations recorded (add ddip-bpic to detectors)");
  }
  std::vector<int> all;
  if (snr_index) {
    if (*snr_index >= sweep.ddip_iterations.size()) throw ParameterError("SNR index out of range");
    all = sweep.ddip_iterations[*snr_index];
  } else {
    for (const auto& v : sweep.ddip_iterations) all.insert(all.end(), v.begin(), v.end());
  }
  if (all.empty()) throw ParameterError("no ddip-bpic stopping iterations recorded");
  return all;
}

}  // namespace

std::string_view detector_name(Detector d) {
  switch (d) {
    case Detector::Mmse: return "mmse";
    case Detector::MmseBpic: return "mmse-bpic";
    case Detector::DdipBpic: return "ddip-bpic";
  }
  return "?";
}

Detector parse_detector(std::string_view name) {
  if (name == "mmse") return Detector::Mmse;
  if (name == "mmse-bpic") return Detector::MmseBpic;
  if (name == "ddip-bpic") return Detector::DdipBpic;
  throw ParameterError("unknown detector '" + std::string(name) +
                       "' (expected mmse, mmse-bpic or ddip-bpic)");
}

bool SimConfig::uses(Detector d) const {
  return std::find(detectors.begin(), detectors.end(), d) != detectors.end();
}

void validate(const SimConfig& cfg) {
  validate_channel_params(cfg.P, cfg.l_max, cfg.k_max, cfg.M, cfg.N);
  Constellation{cfg.qam};
  if (cfg.frames < 1) throw ParameterError("frames = " + std::to_string(cfg.frames) + " violates frames >= 1");
  if (cfg.snr_db.empty()) throw ParameterError("snr_db list is empty");
  for (double s : cfg.snr_db) {
    if (std::isnan(s)) throw ParameterError("snr_db contains NaN");
  }
  if (cfg.detectors.empty()) throw ParameterError("detector list is empty");
  for (std::size_t i = 0; i < cfg.detectors.size(); ++i) {
    for (std::size_t j = i + 1; j < cfg.detectors.size(); ++j) {
      if (cfg.detectors[i] == cfg.detectors[j]) {
        throw ParameterError("detector '" + std::string(detector_name(cfg.detectors[i])) + "' listed twice");
      }
    }
  }
  if (cfg.T < 1) throw ParameterError("T = " + std::to_string(cfg.T) + " violates T >= 1");
  validate(cfg.ddip);
}

Frame make_frame(const SimConfig& cfg, double snr_db, std::uint64_t frame_index) {
  const Constellation cons(cfg.qam);
  const int symbols = cfg.M * cfg.N;

  Rng bit_rng = make_stream(cfg.seed, frame_index, Stream::Bits);
  std::bernoulli_distribution coin(0.5);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(symbols * cons.bits_per_symbol()));
  for (auto& b : bits) b = coin(bit_rng) ? 1 : 0;

  Frame frame;
  frame.symbols = map_bits(bits, cons, cfg.M, cfg.N);
  frame.labels = grid_labels(frame.symbols, cons);

  Rng channel_rng = make_stream(cfg.seed, frame_index, Stream::Channel);
  frame.channel = sample_channel(cfg.P, cfg.l_max, cfg.k_max, cfg.M, cfg.N, channel_rng);

  const double sigma_c2 = snr_to_sigma2(snr_db);
  Rng noise_rng = make_stream(cfg.seed, frame_index, Stream::Noise);
  const TimeSignal tx = modulate(frame.symbols);
  const TimeSignal rx = add_awgn(apply_channel_samplewise(tx, frame.channel), sigma_c2, noise_rng);
  const CVector y_dd = demodulate(rx).vectorized();
  frame.model = to_real_model(effective_dd_matrix(frame.channel), y_dd, sigma_c2,
                              frame.symbols.vectorized());
  return frame;
}

int count_symbol_errors(const std::vector<int>& decided, const std::vector<int>& truth) {
  if (decided.size() != truth.size()) throw InputSizeError("symbol count mismatch");
  int errors = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) errors += decided[i] != truth[i] ? 1 : 0;
  return errors;
}

const DetectorOutcome* TrialResult::find(Detector d) const {
  for (const auto& o : outcomes)
    if (o.detector == d) return &o;
  return nullptr;
}

TrialResult run_trial(const SimConfig& cfg, const Frame& frame, std::uint64_t frame_index) {
  using clock = std::chrono::steady_clock;
  const Constellation cons(cfg.qam);
  const RealAlphabet alphabet = RealAlphabet::from(cons);
  const BpicModel prepared(frame.model);

  TrialResult result;
  result.frame_index = frame_index;
  std::optional<RVector> x_mmse;

  auto score = [&](Detector d, const RVector& x, clock::time_point start) {
    DetectorOutcome o{d, 0, std::chrono::duration<double>(clock::now() - start).count(), {}};
    o.decided = hard_demap(x, cons, cfg.M, cfg.N).labels;
    o.symbol_errors = count_symbol_errors(o.decided, frame.labels);
    result.outcomes.push_back(std::move(o));
  };

  for (Detector d : cfg.detectors) {
    const auto start = clock::now();
    switch (d) {
      case Detector::Mmse:
        if (!x_mmse) x_mmse = mmse_denoise(prepared);
        score(d, *x_mmse, start);
        break;
      case Detector::MmseBpic:
        if (!x_mmse) x_mmse = mmse_denoise(prepared);
        score(d, run_bpic(prepared, *x_mmse, cfg.T, alphabet).x_hat, start);
        break;
      case Detector::DdipBpic: {
        Rng net_rng = make_stream(cfg.seed, frame_index, Stream::Network);
        DdipResult fit = run_ddip(frame.model, cfg.ddip, net_rng);
        result.ddip_iterations = fit.iterations;
        result.ddip_truncated = fit.truncated;
        result.loss_trace = std::move(fit.trace);
        score(d, run_bpic(prepared, fit.x_init, cfg.T, alphabet).x_hat, start);
        break;
      }
    }
  }
  return result;
}

TrialResult run_trial(const SimConfig& cfg, double snr_db, std::uint64_t frame_index) {
  try {
    return run_trial(cfg, make_frame(cfg, snr_db, frame_index), frame_index);
  } catch (const std::exception& e) {
    throw TrialError(snr_db, frame_index, e.what());
  }
}

TrialError::TrialError(double snr, std::uint64_t frame, const std::string& what)
    : std::runtime_error("trial failed (snr_db=" + fmt_general(snr) + ", frame=" +
                         std::to_string(frame) + "): " + what),
      snr_db(snr),
      frame_index(frame) {}

WilsonInterval wilson_interval(long long successes, long long trials, double z) {
  if (trials <= 0) return {0.0, 1.0, 0.5};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  const double low = successes == 0 ? 0.0 : std::max(0.0, center - half);
  const double high = successes == trials ? 1.0 : std::min(1.0, center + half);
  return {low, high, half};
}

const SerPoint* SweepResult::find(Detector d, double snr) const {
  for (const auto& p : points)
    if (p.detector == d && p.snr_db == snr) return &p;
  return nullptr;
}

SweepResult aggregate(const SimConfig& cfg, const std::vector<TrialResult>& trials) {
  const std::size_t S = cfg.snr_db.size();
  const std::size_t F = static_cast<std::size_t>(cfg.frames);
  if (trials.size() != S * F) throw InputSizeError("aggregate: trial count mismatch");
  const long long per_frame = static_cast<long long>(cfg.M) * cfg.N;

  SweepResult out;
  out.snr_db = cfg.snr_db;
  const bool ddip = cfg.uses(Detector::DdipBpic);
  if (ddip) {
    out.ddip_iterations.assign(S, {});
    out.ddip_truncated.assign(S, {});
  }
  for (std::size_t s = 0; s < S; ++s) {
    for (Detector d : cfg.detectors) {
      SerPoint p;
      p.detector = d;
      p.snr_db = cfg.snr_db[s];
      p.frames = cfg.frames;
      p.symbols = per_frame * cfg.frames;
      for (std::size_t f = 0; f < F; ++f) p.symbol_errors += trials[s * F + f].find(d)->symbol_errors;
      p.ser = static_cast<double>(p.symbol_errors) / static_cast<double>(p.symbols);
      const WilsonInterval ci = wilson_interval(p.symbol_errors, p.symbols);
      p.ci_low = ci.low;
      p.ci_high = ci.high;
      p.ci_halfwidth = ci.halfwidth;
      out.points.push_back(p);
    }
    if (ddip) {
      for (std::size_t f = 0; f < F; ++f) {
        out.ddip_iterations[s].push_back(trials[s * F + f].ddip_iterations);
        out.ddip_truncated[s].push_back(trials[s * F + f].ddip_truncated);
      }
    }
  }
  return out;
}

namespace {

void slim(TrialResult& t) {
  for (auto& o : t.outcomes) o.decided = {};
  t.loss_trace = {};
}

}  // namespace

SweepResult run_sweep(const SimConfig& cfg) {
  validate(cfg);
  const long long S = static_cast<long long>(cfg.snr_db.size());
  const long long F = cfg.frames;
  std::vector<TrialResult> trials(static_cast<std::size_t>(S * F));
  std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic, 4)
  for (long long idx = 0; idx < S * F; ++idx) {
    try {
      TrialResult t = run_trial(cfg, cfg.snr_db[static_cast<std::size_t>(idx / F)],
                                static_cast<std::uint64_t>(idx % F));
      slim(t);
      trials[static_cast<std::size_t>(idx)] = std::move(t);
    } catch (...) {
#pragma omp critical(otfs_sweep_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return aggregate(cfg, trials);
}

SweepResult run_sweep_serial(const SimConfig& cfg) {
  validate(cfg);
  std::vector<TrialResult> trials;
  trials.reserve(cfg.snr_db.size() * static_cast<std::size_t>(cfg.frames));
  for (double snr : cfg.snr_db) {
    for (int f = 0; f < cfg.frames; ++f) {
      trials.push_back(run_trial(cfg, snr, static_cast<std::uint64_t>(f)));
      slim(trials.back());
    }
  }
  return aggregate(cfg, trials);
}

std::vector<std::pair<int, double>> iteration_cdf(const SweepResult& sweep,
                                                  std::optional<std::size_t> snr_index) {
  std::vector<int> values = collect_iterations(sweep, snr_index);
  std::sort(values.begin(), values.end());
  std::vector<std::pair<int, double>> cdf;
  const double total = static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i + 1 == values.size() || values[i + 1] != values[i]) {
      cdf.emplace_back(values[i], static_cast<double>(i + 1) / total);
    }
  }
  return cdf;
}

double median_iterations(const SweepResult& sweep, std::optional<std::size_t> snr_index) {
  std::vector<int> values = collect_iterations(sweep, snr_index);
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double mean_iterations(const SweepResult& sweep, std::optional<std::size_t> snr_index) {
  const std::vector<int> values = collect_iterations(sweep, snr_index);
  double total = 0.0;
  for (int v : values) total += v;
  return total / static_cast<double>(values.size());
}

const ComplexityEntry& ComplexityReport::at(std::string_view detector) const {
  for (const auto& e : entries)
    if (e.detector == detector) return e;
  throw ParameterError("no complexity entry for '" + std::string(detector) + "'");
}

ComplexityReport complexity_report(int M, int N, int T, int I) {
  if (M < 1 || N < 1 || T < 0 || I < 0) throw ParameterError("complexity: invalid dimensions");
  const std::uint64_t mn = static_cast<std::uint64_t>(M) * static_cast<std::uint64_t>(N);
  const std::uint64_t mn2 = mn * mn;
  const std::uint64_t mn3 = mn2 * mn;
  const std::uint64_t t = static_cast<std::uint64_t>(T);
  const std::uint64_t i = static_cast<std::uint64_t>(I);

  ComplexityReport r{M, N, T, I, {}};
  const std::uint64_t ddip = mn2 * i + mn2 * t;
  auto add = [&](const char* name, std::uint64_t ops) {
    const double ratio = ddip == 0 ? NAN : static_cast<double>(ops) / static_cast<double>(ddip);
    r.entries.push_back({name, ops, ratio});
  };
  add("mmse-bpic", mn3 + mn2 * t);
  add("uamp", mn3 + mn2 * t);
  add("ep", mn3 * t);
  add("bpicnet", mn3 + mn + mn2 * t);
  add("ddip-bpic", ddip);
  return r;
}

void write_sweep_csv(std::ostream& os, const SweepResult& sweep) {
  os << "detector,snr_db,frames,symbol_errors,ser,ci_halfwidth\n";
  for (const auto& p : sweep.points) {
    os << detector_name(p.detector) << ',' << fmt_general(p.snr_db) << ',' << p.frames << ','
       << p.symbol_errors << ',' << fmt_sci(p.ser) << ',' << fmt_sci(p.ci_halfwidth) << '\n';
  }
}

void write_cdf_csv(std::ostream& os, const std::vector<std::pair<int, double>>& cdf) {
  os << "I,cum_fraction\n";
  for (const auto& [i, f] : cdf) os << i << ',' << fmt_general(f) << '\n';
}

void write_complexity_csv(std::ostream& os, const ComplexityReport& report) {
  os << "detector,operations,ratio_to_ddip_bpic\n";
  for (const auto& e : report.entries) {
    os << e.detector << ',' << e.operations << ',' << fmt_general(e.ratio_to_ddip) << '\n';
  }
}

}  // namespace otfs
