#pragma once

// Delay-Doppler frame handling for OTFS with rectangular pulses
// (G_tx = G_rx = I_M).
//
//   bits -> QAM -> X_DD (M x N) -> ISFFT -> X_TF -> Heisenberg -> s (MN)
//   r (MN) -> Wigner -> Y_TF -> SFFT -> Y_DD
//
// Grids are M (delay / subcarrier) rows by N (Doppler / time slot) columns
// and are vectorized column-major throughout.

#include <cstdint>
#include <span>
#include <vector>

#include "otfs/types.hpp"

namespace otfs {

/// Gray-coded square QAM with unit average symbol energy.
class Constellation {
 public:
  /// `order` must be a power of 4 (4, 16, 64, ...).
  explicit Constellation(int order = 4);

  int order() const { return order_; }
  int bits_per_symbol() const { return bits_per_symbol_; }
  /// Per-dimension amplitude unit; 1/sqrt(2) for 4-QAM.
  double amplitude() const { return amplitude_; }

  /// Point for a symbol label (the integer value of its bit group, MSB first).
  cplx point(int label) const { return points_[static_cast<std::size_t>(label)]; }
  const std::vector<cplx>& points() const { return points_; }

  /// Sorted per-dimension real levels (the real alphabet).
  const std::vector<double>& levels() const { return levels_; }

  /// Label of the nearest point; ties resolve to the lexicographically
  /// smallest point (real part, then imaginary part).
  int nearest_label(cplx z) const;

 private:
  int order_;
  int bits_per_symbol_;
  double amplitude_;
  std::vector<cplx> points_;
  std::vector<double> levels_;
};

struct DDGrid {
  int M = 0;
  int N = 0;
  CMatrix entries;  // M x N

  DDGrid() = default;
  DDGrid(int m, int n) : M(m), N(n), entries(CMatrix::Zero(m, n)) {}
  explicit DDGrid(CMatrix e)
      : M(static_cast<int>(e.rows())), N(static_cast<int>(e.cols())), entries(std::move(e)) {}

  CVector vectorized() const;
  static DDGrid devectorize(const CVector& v, int M, int N);
};

struct TimeSignal {
  CVector samples;  // length MN
  int M = 0;
  int N = 0;

  /// Sample period T_s / M with T_s = 1 / delta_f.
  double sample_period(double delta_f) const { return 1.0 / (delta_f * M); }
};

/// Unitary DFT matrix, entry (p, q) = exp(-j 2 pi p q / n) / sqrt(n).
CMatrix dft_matrix(int n);

DDGrid map_bits(std::span<const std::uint8_t> bits, const Constellation& cons, int M, int N);

/// Symbol labels of a grid drawn from the constellation (column-major).
std::vector<int> grid_labels(const DDGrid& grid, const Constellation& cons);

DDGrid isfft(const DDGrid& dd);
DDGrid sfft(const DDGrid& tf);

TimeSignal modulate(const DDGrid& dd);
DDGrid demodulate(const TimeSignal& r);

struct HardDecision {
  DDGrid grid;
  std::vector<int> labels;
  std::vector<std::uint8_t> bits;
};

/// Minimum-distance decision on a stacked real vector [Re; Im] of length 2MN.
HardDecision hard_demap(const RVector& x, const Constellation& cons, int M, int N);

/// [Re(v); Im(v)]
RVector stack_real(const CVector& v);
CVector unstack_real(const RVector& x);

}  // namespace otfs
