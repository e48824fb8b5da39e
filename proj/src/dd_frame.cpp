#include "otfs/dd_frame.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <string>

namespace otfs {

namespace {

int gray_to_binary(int g) {
  int b = 0;
  for (; g != 0; g >>= 1) b ^= g;
  return b;
}

// Per-dimension slicer over ascending levels; ties go to the lower level.
int slice(double v, const std::vector<double>& levels) {
  int best = 0;
  double best_d = std::abs(v - levels[0]);
  for (std::size_t i = 1; i < levels.size(); ++i) {
    const double d = std::abs(v - levels[i]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace

Constellation::Constellation(int order) : order_(order) {
  if (order < 4 || !std::has_single_bit(static_cast<unsigned>(order)) ||
      (std::countr_zero(static_cast<unsigned>(order)) % 2) != 0) {
    throw ParameterError("QAM order must be a power of 4, got " + std::to_string(order));
  }
  bits_per_symbol_ = std::countr_zero(static_cast<unsigned>(order));
  const int half_bits = bits_per_symbol_ / 2;
  const int side = 1 << half_bits;
  amplitude_ = 1.0 / std::sqrt(2.0 * (order - 1) / 3.0);

  // Gray label g on one axis sits at level index gray_to_binary(g); index 0
  // is the most positive level so that the all-zero label maps to (+c, +c).
  auto axis_value = [&](int g) {
    const int idx = gray_to_binary(g);
    return (side - 1 - 2 * idx) * amplitude_;
  };
  points_.resize(static_cast<std::size_t>(order));
  for (int label = 0; label < order; ++label) {
    const int gi = label >> half_bits;
    const int gq = label & (side - 1);
    points_[static_cast<std::size_t>(label)] = {axis_value(gi), axis_value(gq)};
  }
  levels_.resize(static_cast<std::size_t>(side));
  for (int i = 0; i < side; ++i) levels_[static_cast<std::size_t>(i)] = (2 * i - side + 1) * amplitude_;
}

int Constellation::nearest_label(cplx z) const {
  const int side = static_cast<int>(levels_.size());
  const int half_bits = bits_per_symbol_ / 2;
  // Ascending level index k corresponds to descending axis index side-1-k.
  auto to_gray = [&](int ascending) {
    const int idx = side - 1 - ascending;
    return idx ^ (idx >> 1);
  };
  const int gi = to_gray(slice(z.real(), levels_));
  const int gq = to_gray(slice(z.imag(), levels_));
  return (gi << half_bits) | gq;
}

CVector DDGrid::vectorized() const {
  return Eigen::Map<const CVector>(entries.data(), entries.size());
}

DDGrid DDGrid::devectorize(const CVector& v, int M, int N) {
  if (v.size() != static_cast<Eigen::Index>(M) * N) {
    throw InputSizeError("devectorize: length " + std::to_string(v.size()) + " != M*N = " +
                         std::to_string(M * N));
  }
  return DDGrid(CMatrix(Eigen::Map<const CMatrix>(v.data(), M, N)));
}

CMatrix dft_matrix(int n) {
  CMatrix F(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      // Reduce the exponent mod n before scaling to keep the phase exact.
      const int pq = (p * q) % n;
      F(p, q) = std::polar(scale, -2.0 * std::numbers::pi * pq / n);
    }
  }
  return F;
}

DDGrid map_bits(std::span<const std::uint8_t> bits, const Constellation& cons, int M, int N) {
  const std::size_t k = static_cast<std::size_t>(cons.bits_per_symbol());
  const std::size_t symbols = static_cast<std::size_t>(M) * static_cast<std::size_t>(N);
  if (bits.size() != symbols * k) {
    throw InputSizeError("map_bits: expected " + std::to_string(symbols * k) + " bits, got " +
                         std::to_string(bits.size()));
  }
  DDGrid grid(M, N);
  cplx* out = grid.entries.data();
  for (std::size_t s = 0; s < symbols; ++s) {
    int label = 0;
    for (std::size_t b = 0; b < k; ++b) label = (label << 1) | (bits[s * k + b] & 1);
    out[s] = cons.point(label);
  }
  return grid;
}

std::vector<int> grid_labels(const DDGrid& grid, const Constellation& cons) {
  std::vector<int> labels(static_cast<std::size_t>(grid.entries.size()));
  const cplx* in = grid.entries.data();
  for (std::size_t s = 0; s < labels.size(); ++s) labels[s] = cons.nearest_label(in[s]);
  return labels;
}

DDGrid isfft(const DDGrid& dd) {
  return DDGrid(CMatrix(dft_matrix(dd.M) * dd.entries * dft_matrix(dd.N).adjoint()));
}

DDGrid sfft(const DDGrid& tf) {
  return DDGrid(CMatrix(dft_matrix(tf.M).adjoint() * tf.entries * dft_matrix(tf.N)));
}

// s = vec(X_DD F_N^H); the F_M^H of the Heisenberg transform cancels the F_M
// of the ISFFT.
TimeSignal modulate(const DDGrid& dd) {
  const CMatrix S = dd.entries * dft_matrix(dd.N).adjoint();
  return TimeSignal{Eigen::Map<const CVector>(S.data(), S.size()), dd.M, dd.N};
}

DDGrid demodulate(const TimeSignal& r) {
  const DDGrid R = DDGrid::devectorize(r.samples, r.M, r.N);
  return DDGrid(CMatrix(R.entries * dft_matrix(r.N)));
}

HardDecision hard_demap(const RVector& x, const Constellation& cons, int M, int N) {
  const Eigen::Index mn = static_cast<Eigen::Index>(M) * N;
  if (x.size() != 2 * mn) {
    throw InputSizeError("hard_demap: expected length " + std::to_string(2 * mn) + ", got " +
                         std::to_string(x.size()));
  }
  HardDecision out{DDGrid(M, N), std::vector<int>(static_cast<std::size_t>(mn)), {}};
  const int k = cons.bits_per_symbol();
  out.bits.reserve(static_cast<std::size_t>(mn * k));
  cplx* dst = out.grid.entries.data();
  for (Eigen::Index q = 0; q < mn; ++q) {
    const int label = cons.nearest_label({x[q], x[q + mn]});
    out.labels[static_cast<std::size_t>(q)] = label;
    dst[q] = cons.point(label);
    for (int b = k - 1; b >= 0; --b) out.bits.push_back(static_cast<std::uint8_t>((label >> b) & 1));
  }
  return out;
}

RVector stack_real(const CVector& v) {
  RVector x(2 * v.size());
  x.head(v.size()) = v.real();
  x.tail(v.size()) = v.imag();
  return x;
}

CVector unstack_real(const RVector& x) {
  const Eigen::Index n = x.size() / 2;
  CVector v(n);
  v.real() = x.head(n);
  v.imag() = x.tail(n);
  return v;
}

}  // namespace otfs
