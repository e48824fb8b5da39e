#include "otfs/bpic.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace otfs {

BpicModel::BpicModel(const RealLinearModel& model) : model_(model) {
  if (model.H.rows() != model.y.size()) throw InputSizeError("BPIC: H rows != length of y");
  gram_.noalias() = model.H.transpose() * model.H;
  column_norm2_ = gram_.diagonal();
  for (Eigen::Index q = 0; q < column_norm2_.size(); ++q) {
    if (!(column_norm2_[q] > 0.0)) {
      throw DegenerateModelError("BPIC: column " + std::to_string(q) + " of H is zero");
    }
  }
  cross_power_ = gram_.array().square().matrix();
  cross_power_.diagonal().setZero();
}

RVector mmse_denoise(const BpicModel& prepared) {
  const RealLinearModel& m = prepared.model();
  RMatrix A = prepared.gram();
  A.diagonal().array() += m.sigma2;
  Eigen::LLT<RMatrix> llt(A);
  if (llt.info() != Eigen::Success || llt.rcond() < 16 * std::numeric_limits<double>::epsilon()) {
    throw NumericalError("MMSE: H^T H + sigma2 I is not positive definite");
  }
  RVector x = llt.solve(m.H.transpose() * m.y);
  if (!x.allFinite()) throw NumericalError("MMSE: non-finite solution");
  return x;
}

RVector mmse_denoise(const RealLinearModel& model) { return mmse_denoise(BpicModel(model)); }

BsoOutput bso_step(const BpicModel& prepared, const RVector& x_prev, const RVector& v_prev) {
  const RealLinearModel& m = prepared.model();
  const RVector& d = prepared.column_norm2();
  const RVector matched = m.H.transpose() * (m.y - m.H * x_prev);
  BsoOutput out;
  out.mu = x_prev.array() + matched.array() / d.array();
  const RVector interference = prepared.cross_power() * v_prev;
  out.Sigma = (interference.array() + d.array() * m.sigma2) / d.array().square();
  return out;
}

RMatrix bse_posteriors(const RVector& mu, const RVector& Sigma, const RealAlphabet& alphabet) {
  const auto& pts = alphabet.points;
  const Eigen::Index count = static_cast<Eigen::Index>(pts.size());
  RMatrix post(mu.size(), count);
  for (Eigen::Index q = 0; q < mu.size(); ++q) {
    if (Sigma[q] == 0.0) {
      Eigen::Index best = 0;
      for (Eigen::Index a = 1; a < count; ++a) {
        if (std::abs(mu[q] - pts[static_cast<std::size_t>(a)]) < std::abs(mu[q] - pts[static_cast<std::size_t>(best)])) best = a;
      }
      post.row(q).setZero();
      post(q, best) = 1.0;
      continue;
    }
    double top = -INFINITY;
    for (Eigen::Index a = 0; a < count; ++a) {
      const double diff = mu[q] - pts[static_cast<std::size_t>(a)];
      post(q, a) = -diff * diff / (2.0 * Sigma[q]);
      top = std::max(top, post(q, a));
    }
    double total = 0.0;
    for (Eigen::Index a = 0; a < count; ++a) {
      post(q, a) = std::exp(post(q, a) - top);
      total += post(q, a);
    }
    post.row(q) /= total;
  }
  return post;
}

BseOutput bse_step(const RVector& mu, const RVector& Sigma, const RealAlphabet& alphabet) {
  const RMatrix post = bse_posteriors(mu, Sigma, alphabet);
  const Eigen::Map<const RVector> pts(alphabet.points.data(), static_cast<Eigen::Index>(alphabet.points.size()));
  BseOutput out;
  out.x_hat = post * pts;
  out.v.resize(mu.size());
  for (Eigen::Index q = 0; q < mu.size(); ++q) {
    out.v[q] = (post.row(q).transpose().array() * (pts.array() - out.x_hat[q]).square()).sum();
  }
  return out;
}

RVector instantaneous_errors(const BpicModel& prepared, const RVector& x) {
  const RealLinearModel& m = prepared.model();
  const RVector matched = m.H.transpose() * (m.y - m.H * x);
  return (matched.array() / prepared.column_norm2().array()).square();
}

BpicState dsc_step(const BpicState& prev, const BsoOutput& bso, const BseOutput& bse,
                   const BpicModel& prepared) {
  BpicState next;
  next.t = prev.t + 1;
  next.mu = bso.mu;
  next.Sigma = bso.Sigma;
  next.e_prev = prev.e_curr;
  next.e_curr = instantaneous_errors(prepared, bse.x_hat);
  const Eigen::Index n = bse.x_hat.size();
  next.rho.resize(n);
  next.x_hat.resize(n);
  next.v.resize(n);
  for (Eigen::Index q = 0; q < n; ++q) {
    const double total = next.e_curr[q] + next.e_prev[q];
    const double rho = total > 0.0 ? next.e_prev[q] / total : 1.0;
    next.rho[q] = rho;
    // (1 - rho) a + rho b, written so that a == b is reproduced exactly.
    next.x_hat[q] = prev.x_hat[q] + rho * (bse.x_hat[q] - prev.x_hat[q]);
    next.v[q] = prev.v[q] + rho * (bse.v[q] - prev.v[q]);
  }
  return next;
}

BpicResult run_bpic(const BpicModel& prepared, const RVector& x_init, int T,
                    const RealAlphabet& alphabet) {
  if (T < 1) throw ParameterError("BPIC: T = " + std::to_string(T) + " violates T >= 1");
  const Eigen::Index n = prepared.model().dim();
  if (x_init.size() != n) {
    throw InputSizeError("BPIC: initial estimate has length " + std::to_string(x_init.size()) +
                         ", expected " + std::to_string(n));
  }
  BpicResult result;
  result.trace.reserve(static_cast<std::size_t>(T));

  const BsoOutput bso = bso_step(prepared, x_init, RVector::Zero(n));
  BseOutput bse = bse_step(bso.mu, bso.Sigma, alphabet);
  BpicState state;
  state.t = 1;
  state.mu = bso.mu;
  state.Sigma = bso.Sigma;
  state.e_curr = instantaneous_errors(prepared, bse.x_hat);
  state.x_hat = std::move(bse.x_hat);
  state.v = std::move(bse.v);
  result.trace.push_back(state);

  for (int t = 2; t <= T; ++t) {
    const BsoOutput b = bso_step(prepared, state.x_hat, state.v);
    const BseOutput e = bse_step(b.mu, b.Sigma, alphabet);
    state = dsc_step(state, b, e, prepared);
    result.trace.push_back(state);
  }
  result.x_hat = state.x_hat;
  result.v = state.v;
  return result;
}

BpicResult run_bpic(const RealLinearModel& model, const RVector& x_init, int T,
                    const RealAlphabet& alphabet) {
  return run_bpic(BpicModel(model), x_init, T, alphabet);
}

}  // namespace otfs
