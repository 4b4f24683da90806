#pragma once

#include "rdbridge/distortion.hpp"
#include "rdbridge/measures.hpp"
#include "rdbridge/types.hpp"

namespace rdbridge::detail {

// Tabulates exp(-beta (rho_ij - m_i)) with m_i the finite row minimum, so every
// row peaks at 1 and e^{-beta rho_ij} = e^{-shift_i} K_ij. Reductions run in
// linear arithmetic against this kernel and fall back to an exact logsumexp
// for any output whose linear sum drops below kUnderflowGuard. Infinite losses
// are excluded from the reference measure (kernel entry 0).
class GibbsKernel {
 public:
  static constexpr double kUnderflowGuard = 1e-200;
  static constexpr double kLogDomainThreshold = 30.0;

  GibbsKernel(const DistortionMatrix& rho, double beta);

  Index rows() const { return k_.rows(); }
  Index cols() const { return k_.cols(); }
  double beta() const { return beta_; }
  const Matrix& kernel() const { return k_; }
  const DistortionMatrix& loss() const { return *rho_; }
  double shift(Index i) const { return shift_[i]; }
  /// beta * max finite rho > 30: kernel entries can underflow, so the
  /// logsumexp fallback may be exercised.
  bool log_domain() const { return log_domain_; }

  /// ln K_ij, -inf for infinite loss.
  double log_entry(Index i, Index j) const;

  /// out_i = ln sum_j exp(w_j) K_ij  (w over Y, -inf allowed).
  void row_lse(const Vector& w, Vector& out) const;
  /// out_j = ln sum_i exp(w_i) K_ij  (w over X, -inf allowed).
  void col_lse(const Vector& w, Vector& out) const;

  /// Shifted log partition ln sum_j nu_j K_ij; add -shift_i for the true value.
  void log_partition(const Vector& nu, Vector& log_z) const;
  /// c_j = sum_i mu_i K_ij / Z_i (shift-free), given shifted log partitions.
  void column_load(const Vector& mu, const Vector& log_z, Vector& c) const;
  /// Gibbs conditional law of row i: nu_j K_ij / Z_i.
  void conditional(Index i, const Vector& nu, double log_z, Eigen::Ref<Vector> out) const;

 private:
  const DistortionMatrix* rho_;
  double beta_;
  Matrix k_;
  Matrix kt_;
  Vector shift_;
  bool log_domain_;
};

Vector log_of(const Vector& v);

}  // namespace rdbridge::detail
