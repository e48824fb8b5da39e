#include "otfs/channel.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>

namespace otfs {

namespace {

// (F kron I_M) A, with F n x n and A of n*M rows.
CMatrix kron_identity_left(const CMatrix& F, const CMatrix& A, int M) {
  const Eigen::Index n = F.rows();
  CMatrix out = CMatrix::Zero(A.rows(), A.cols());
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index c = 0; c < n; ++c)
      out.middleRows(a * M, M).noalias() += F(a, c) * A.middleRows(c * M, M);
  return out;
}

// A (F kron I_M), with F n x n and A of n*M columns.
CMatrix kron_identity_right(const CMatrix& A, const CMatrix& F, int M) {
  const Eigen::Index n = F.rows();
  CMatrix out = CMatrix::Zero(A.rows(), A.cols());
  for (Eigen::Index b = 0; b < n; ++b)
    for (Eigen::Index d = 0; d < n; ++d)
      out.middleCols(b * M, M).noalias() += F(d, b) * A.middleCols(d * M, M);
  return out;
}

cplx doppler_phase(int k, long long n, long long mn) {
  // Reduce mod MN so large n does not lose phase precision.
  const long long r = ((static_cast<long long>(k) * n) % mn + mn) % mn;
  return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(mn));
}

}  // namespace

void validate_channel_params(int P, int l_max, int k_max, int M, int N) {
  if (M < 1 || N < 1) throw ParameterError("grid requires M >= 1 and N >= 1");
  if (P < 1) throw ParameterError("P = " + std::to_string(P) + " violates P >= 1");
  if (l_max < 0 || l_max > M - 1) {
    throw ParameterError("l_max = " + std::to_string(l_max) + " violates 0 <= l_max <= M-1 = " +
                         std::to_string(M - 1));
  }
  if (k_max < 0 || k_max > N / 2) {
    throw ParameterError("k_max = " + std::to_string(k_max) +
                         " violates 0 <= k_max <= floor(N/2) = " + std::to_string(N / 2));
  }
  const long long pairs = static_cast<long long>(l_max + 1) * (2 * k_max + 1);
  if (P > pairs) {
    throw ParameterError("P = " + std::to_string(P) + " violates P <= (l_max+1)(2k_max+1) = " +
                         std::to_string(pairs));
  }
}

ChannelRealization sample_channel(int P, int l_max, int k_max, int M, int N, Rng& rng) {
  validate_channel_params(P, l_max, k_max, M, N);
  std::vector<std::pair<int, int>> lattice;
  lattice.reserve(static_cast<std::size_t>((l_max + 1) * (2 * k_max + 1)));
  for (int l = 0; l <= l_max; ++l)
    for (int k = -k_max; k <= k_max; ++k) lattice.emplace_back(l, k);

  // Partial Fisher-Yates: first P slots become a uniform draw without
  // replacement.
  for (int i = 0; i < P; ++i) {
    std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), lattice.size() - 1);
    std::swap(lattice[static_cast<std::size_t>(i)], lattice[pick(rng)]);
  }

  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5 / P));
  ChannelRealization ch{{}, M, N};
  ch.paths.reserve(static_cast<std::size_t>(P));
  for (int i = 0; i < P; ++i) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    const auto [l, k] = lattice[static_cast<std::size_t>(i)];
    ch.paths.push_back({cplx(re, im), l, k});
  }
  return ch;
}

CMatrix time_domain_matrix(const ChannelRealization& ch) {
  const long long mn = static_cast<long long>(ch.M) * ch.N;
  CMatrix H = CMatrix::Zero(mn, mn);
  for (const auto& p : ch.paths) {
    for (long long n = 0; n < mn; ++n) {
      const long long m = ((n - p.delay_index) % mn + mn) % mn;
      H(n, m) += p.gain * doppler_phase(p.doppler_index, m, mn);
    }
  }
  return H;
}

TimeSignal apply_channel_samplewise(const TimeSignal& s, const ChannelRealization& ch) {
  const long long mn = static_cast<long long>(ch.M) * ch.N;
  if (s.samples.size() != mn) {
    throw InputSizeError("apply_channel_samplewise: signal length " +
                         std::to_string(s.samples.size()) + " != MN = " + std::to_string(mn));
  }
  TimeSignal r{CVector::Zero(mn), s.M, s.N};
  for (long long n = 0; n < mn; ++n) {
    cplx acc = 0.0;
    for (const auto& p : ch.paths) {
      const long long shifted = ((n - p.delay_index) % mn + mn) % mn;
      acc += p.gain * doppler_phase(p.doppler_index, n - p.delay_index, mn) * s.samples[shifted];
    }
    r.samples[n] = acc;
  }
  return r;
}

CMatrix effective_dd_matrix(const ChannelRealization& ch) {
  const CMatrix FN = dft_matrix(ch.N);
  const CMatrix H = time_domain_matrix(ch);
  return kron_identity_right(kron_identity_left(FN, H, ch.M), FN.adjoint(), ch.M);
}

TimeSignal add_awgn(const TimeSignal& r, double sigma_c2, Rng& rng) {
  if (!(sigma_c2 >= 0.0)) throw ParameterError("noise variance must be >= 0");
  TimeSignal out = r;
  if (sigma_c2 == 0.0) return out;
  std::normal_distribution<double> gauss(0.0, std::sqrt(sigma_c2 / 2.0));
  for (Eigen::Index n = 0; n < out.samples.size(); ++n) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    out.samples[n] += cplx(re, im);
  }
  return out;
}

RealLinearModel to_real_model(const CMatrix& H_dd, const CVector& y_dd, double sigma_c2,
                              const std::optional<CVector>& x_dd) {
  const Eigen::Index n = H_dd.rows();
  if (H_dd.cols() != n || y_dd.size() != n || (x_dd && x_dd->size() != n)) {
    throw InputSizeError("to_real_model: inconsistent dimensions");
  }
  RealLinearModel model;
  model.H.resize(2 * n, 2 * n);
  model.H.topLeftCorner(n, n) = H_dd.real();
  model.H.topRightCorner(n, n) = -H_dd.imag();
  model.H.bottomLeftCorner(n, n) = H_dd.imag();
  model.H.bottomRightCorner(n, n) = H_dd.real();
  model.y = stack_real(y_dd);
  model.sigma2 = sigma_c2 / 2.0;
  if (x_dd) model.x_true = stack_real(*x_dd);
  return model;
}

CMatrix complex_from_real_blocks(const RMatrix& H) {
  const Eigen::Index n = H.rows() / 2;
  CMatrix C(n, n);
  C.real() = H.topLeftCorner(n, n);
  C.imag() = H.bottomLeftCorner(n, n);
  return C;
}

void write_channel(std::ostream& os, const ChannelRealization& ch) {
  const auto old_precision = os.precision(17);
  os << "# M=" << ch.M << " N=" << ch.N << '\n';
  for (const auto& p : ch.paths) {
    os << p.gain.real() << ' ' << p.gain.imag() << ' ' << p.delay_index << ' ' << p.doppler_index
       << '\n';
  }
  os.precision(old_precision);
}

ChannelRealization read_channel(std::istream& is) {
  ChannelRealization ch;
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (!have_header && std::sscanf(line.c_str(), "# M=%d N=%d", &ch.M, &ch.N) == 2) {
        have_header = true;
      }
      continue;
    }
    std::istringstream fields(line);
    double re = 0.0, im = 0.0;
    PathParams p;
    if (!(fields >> re >> im >> p.delay_index >> p.doppler_index)) {
      throw ParameterError("malformed channel line: " + line);
    }
    p.gain = {re, im};
    ch.paths.push_back(p);
  }
  if (!have_header) throw ParameterError("channel file lacks '# M=<M> N=<N>' header");
  if (ch.paths.empty()) throw ParameterError("channel file has no paths");
  return ch;
}

}  // namespace otfs
