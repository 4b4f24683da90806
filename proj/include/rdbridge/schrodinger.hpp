#pragma once

#include "rdbridge/distortion.hpp"
#include "rdbridge/errors.hpp"
#include "rdbridge/measures.hpp"

namespace rdbridge {

/// Schrodinger potentials for the reference dgamma = K exp(-beta rho) dmu dnu.
/// The optimal coupling is pi_ij = exp(logK + logF_i + logG_j - beta rho_ij) mu_i nu_j.
/// Gauge: sum_j nu_j logG_j = 0. Atoms of zero mass carry potential 0 and
/// take no part in the solve.
struct ScalingPair {
  Vector log_f;
  Vector log_g;
  double log_k = 0.0;
  double beta = 0.0;
  double marginal_residual = 0.0;
  double tol = 0.0;  // tolerance the pair was solved to
  long iterations = 0;

  /// max - min of logG over supp(nu).
  double g_spread(const ProbabilityVector& nu) const;
};

struct SchrodingerSolution {
  ScalingPair scaling;
  Coupling coupling;
};

class SinkhornConvergenceError : public ConvergenceFailure {
 public:
  SinkhornConvergenceError(const std::string& what, SchrodingerSolution partial)
      : ConvergenceFailure(what), partial_(std::move(partial)) {}
  const SchrodingerSolution& partial() const { return partial_; }

 private:
  SchrodingerSolution partial_;
};

/// Alternating log-domain scaling of f (rows) and g (columns), initialized at
/// f = g = 1, until every column satisfies the third Schrodinger equation
/// to relative accuracy tol. The final half step fixes f, so row marginals
/// are exact up to rounding.
SchrodingerSolution sinkhorn(const ProbabilityVector& mu, const ProbabilityVector& nu,
                             const DistortionMatrix& rho, double beta, double tol, long max_iter);

/// Same solve from a caller-supplied starting potential on Y (for gauge
/// uniqueness checks). log_g0 entries on zero-mass atoms are ignored.
SchrodingerSolution sinkhorn_from(const ProbabilityVector& mu, const ProbabilityVector& nu,
                                  const DistortionMatrix& rho, double beta, double tol,
                                  long max_iter, const Vector& log_g0);

/// J(nu, beta) = -sum_i mu_i ln(sum_j g_j e^{-beta rho_ij} nu_j) + sum_j nu_j ln g_j - beta D.
/// Throws StaleCertificate when scal.marginal_residual > 10 * scal.tol.
double eval_J(const ProbabilityVector& mu, const ProbabilityVector& nu,
              const DistortionMatrix& rho, double beta, double distortion,
              const ScalingPair& scal);

/// L(nu, beta) = sum_i mu_i ln(Z_i / Z^g_i) + sum_j nu_j ln g_j; zero exactly
/// when g is constant on supp(nu), positive otherwise.
double eval_L(const ProbabilityVector& mu, const ProbabilityVector& nu,
              const DistortionMatrix& rho, double beta, const ScalingPair& scal);

struct SchrodingerResidual {
  double row = 0.0;
  double col = 0.0;
  double eq8 = 0.0;
};

SchrodingerResidual schrodinger_residual(const ProbabilityVector& mu, const ProbabilityVector& nu,
                                         const DistortionMatrix& rho, const ScalingPair& scal);

/// The coupling induced by a scaling pair (any pair, converged or not),
/// renormalized only against rounding.
Matrix induced_coupling(const ProbabilityVector& mu, const ProbabilityVector& nu,
                        const DistortionMatrix& rho, const ScalingPair& scal);

}  // namespace rdbridge
