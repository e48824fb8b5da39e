#pragma once

// Bayesian parallel interference cancellation on the real model y = Hx + n.
//
// Each iteration t runs three stages on the 2MN real symbols:
//   BSO  matched-filter interference cancellation -> (mu, Sigma)
//   BSE  posterior mean / variance over the per-dimension alphabet
//   DSC  error-weighted combination with iteration t-1 (skipped at t = 1)
// starting from an initial estimate x^(0) with v^(0) = 0.

#include <vector>

#include "otfs/channel.hpp"
#include "otfs/dd_frame.hpp"
#include "otfs/types.hpp"

namespace otfs {

struct RealAlphabet {
  std::vector<double> points;  // ascending, distinct

  static RealAlphabet from(const Constellation& cons) { return {cons.levels()}; }
};

/// Per-model quantities every BPIC stage reuses. Holds a reference to the
/// model, which must outlive it.
class BpicModel {
 public:
  explicit BpicModel(const RealLinearModel& model);

  const RealLinearModel& model() const { return model_; }
  const RMatrix& gram() const { return gram_; }
  /// (h_q^T h_j)^2 with the diagonal zeroed.
  const RMatrix& cross_power() const { return cross_power_; }
  const RVector& column_norm2() const { return column_norm2_; }

 private:
  const RealLinearModel& model_;
  RMatrix gram_;
  RMatrix cross_power_;
  RVector column_norm2_;
};

/// (H^T H + sigma2 I)^-1 H^T y. Throws NumericalError when the system is
/// singular (sigma2 = 0 with rank-deficient H).
RVector mmse_denoise(const RealLinearModel& model);
RVector mmse_denoise(const BpicModel& prepared);

struct BsoOutput {
  RVector mu;
  RVector Sigma;
};

BsoOutput bso_step(const BpicModel& prepared, const RVector& x_prev, const RVector& v_prev);

/// Normalized posteriors, one row per symbol and one column per alphabet
/// point. Entries with Sigma_q = 0 collapse onto the nearest point.
RMatrix bse_posteriors(const RVector& mu, const RVector& Sigma, const RealAlphabet& alphabet);

struct BseOutput {
  RVector x_hat;
  RVector v;
};

BseOutput bse_step(const RVector& mu, const RVector& Sigma, const RealAlphabet& alphabet);

/// e_q = (h_q^T (y - H x) / ||h_q||^2)^2
RVector instantaneous_errors(const BpicModel& prepared, const RVector& x);

struct BpicState {
  RVector x_hat;
  RVector v;
  RVector mu;
  RVector Sigma;
  RVector e_prev;  // e^(t-1); empty at t = 1
  RVector e_curr;  // e^(t), from the BSE output of iteration t
  RVector rho;     // DSC weights of iteration t; empty at t = 1
  int t = 0;
};

/// Combines the BSE output of iteration prev.t + 1 with the combined state
/// of iteration prev.t. rho_q = 1 when e^(t) + e^(t-1) = 0.
BpicState dsc_step(const BpicState& prev, const BsoOutput& bso, const BseOutput& bse,
                   const BpicModel& prepared);

struct BpicResult {
  RVector x_hat;
  RVector v;
  std::vector<BpicState> trace;  // one entry per iteration
};

BpicResult run_bpic(const RealLinearModel& model, const RVector& x_init, int T,
                    const RealAlphabet& alphabet);
BpicResult run_bpic(const BpicModel& prepared, const RVector& x_init, int T,
                    const RealAlphabet& alphabet);

}  // namespace otfs
