#pragma once

// Doubly dispersive channel on the integer delay-Doppler lattice,
//
//   r(n) = sum_i h_i exp(j 2 pi k_i (n - l_i) / MN) s([n - l_i]_MN) + w(n),
//
// its matrix forms in the time and delay-Doppler domains, and the stacked
// real-valued model consumed by the detectors.

#include <cmath>
#include <iosfwd>
#include <optional>
#include <vector>

#include "otfs/dd_frame.hpp"
#include "otfs/rng.hpp"
#include "otfs/types.hpp"

namespace otfs {

struct PathParams {
  cplx gain;
  int delay_index = 0;    // l_i in [0, l_max]
  int doppler_index = 0;  // k_i in [-k_max, k_max]

  /// Display values only: tau_i = l_i T_s / M and nu_i = k_i delta_f / N.
  double delay_seconds(int M, double delta_f) const { return delay_index / (delta_f * M); }
  double doppler_hz(int N, double delta_f) const { return doppler_index * delta_f / N; }
};

struct ChannelRealization {
  std::vector<PathParams> paths;
  int M = 0;
  int N = 0;
};

struct RealLinearModel {
  RMatrix H;       // 2MN x 2MN, blocks [Re -Im; Im Re]
  RVector y;       // 2MN
  double sigma2 = 0.0;  // per real dimension
  std::optional<RVector> x_true;

  Eigen::Index dim() const { return H.cols(); }
};

/// Checks the lattice bounds; throws ParameterError naming the violated one.
void validate_channel_params(int P, int l_max, int k_max, int M, int N);

ChannelRealization sample_channel(int P, int l_max, int k_max, int M, int N, Rng& rng);

CMatrix time_domain_matrix(const ChannelRealization& ch);
TimeSignal apply_channel_samplewise(const TimeSignal& s, const ChannelRealization& ch);

/// H_DD = (F_N kron I_M) H (F_N^H kron I_M).
CMatrix effective_dd_matrix(const ChannelRealization& ch);

TimeSignal add_awgn(const TimeSignal& r, double sigma_c2, Rng& rng);

inline double snr_to_sigma2(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

RealLinearModel to_real_model(const CMatrix& H_dd, const CVector& y_dd, double sigma_c2,
                              const std::optional<CVector>& x_dd = std::nullopt);

/// Inverse of the block expansion of to_real_model.
CMatrix complex_from_real_blocks(const RMatrix& H);

// Plain-text form: a "# M=<M> N=<N>" header, then one path per line as
// "re(h) im(h) l k".
void write_channel(std::ostream& os, const ChannelRealization& ch);
ChannelRealization read_channel(std::istream& is);

}  // namespace otfs
