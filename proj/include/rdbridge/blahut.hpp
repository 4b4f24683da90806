#pragma once

#include <optional>
#include <vector>

#include "rdbridge/distortion.hpp"
#include "rdbridge/errors.hpp"
#include "rdbridge/measures.hpp"

namespace rdbridge {

/// An atom of the reconstruction alphabet entering or leaving supp(nu).
struct SupportEvent {
  long iteration = 0;
  Index atom = 0;
  bool added = false;  // false: mass fell to zero (or was dropped by the polish)
};

/// One point of the parametric curve. beta >= 0 with dR/dD = -beta; rates in
/// nats, distortion in loss units.
struct RDPoint {
  double beta = 0.0;
  double distortion = 0.0;
  double rate = 0.0;
  ProbabilityVector nu_star;
  long iterations = 0;
  double fixpoint_residual = 0.0;
  double certificate_slack = 0.0;
  bool converged = false;
  std::vector<SupportEvent> support_events;
  std::vector<double> residual_history;  // filled only on request
};

class BlahutConvergenceError : public ConvergenceFailure {
 public:
  BlahutConvergenceError(const std::string& what, RDPoint partial)
      : ConvergenceFailure(what), partial_(std::move(partial)) {}
  const RDPoint& partial() const { return partial_; }

 private:
  RDPoint partial_;
};

struct BlahutOptions {
  /// Bound on the sup-norm change of nu between iterations.
  double tol = 1e-10;
  /// Bound on the certificate slack max_j c_j - 1. Small-mass atoms make the
  /// plain iteration creep, so nu can stop moving long before this holds.
  double slack_tol = 1e-8;
  long max_iter = 100000;
  /// Active-set Newton refinement of nu once plain iterations stall. Every
  /// returned point is still certified by plain fixed-point steps.
  bool polish = true;
  long polish_after = 100;
  long polish_every = 1000;
  int max_polish_rounds = 8;
  bool record_residuals = false;
};

/// Iterates pi_x(y) ~ nu(y) exp(-beta rho(x, y)), nu <- sum_x mu(x) pi_x until
/// the sup-norm change of nu is <= tol and the certificate slack <= slack_tol.
/// Throws BlahutConvergenceError (with the partial point) when the budget runs
/// out, InvalidInput when some source atom has a zero partition function.
RDPoint ba_fixed_point(const ProbabilityVector& mu, const DistortionMatrix& rho, double beta,
                       const ProbabilityVector& nu0, const BlahutOptions& options);

RDPoint ba_fixed_point(const ProbabilityVector& mu, const DistortionMatrix& rho, double beta,
                       const ProbabilityVector& nu0, double tol, long max_iter);

struct RDValue {
  double distortion = 0.0;
  double rate = 0.0;
};

/// (D, R) for the Gibbs coupling dpi = exp(-beta rho) / Z_x dmu dnu, with
/// R = -sum_i mu_i ln Z_i - beta D.
RDValue rd_value_from_nu(const ProbabilityVector& mu, const DistortionMatrix& rho, double beta,
                         const ProbabilityVector& nu);

/// The Gibbs coupling itself. Its row sums are mu by construction.
Coupling gibbs_coupling(const ProbabilityVector& mu, const DistortionMatrix& rho, double beta,
                        const ProbabilityVector& nu);

struct DualCertificate {
  Vector alpha;
  /// c_j = sum_i alpha_i exp(-beta rho_ij) mu_i.
  Vector column_load;
  double slack = 0.0;
  double dual_value = 0.0;
};

/// Csiszar dual pair built from nu: alpha_i = 1 / sum_j nu_j exp(-beta rho_ij).
/// The value uses `distortion` when given, otherwise the distortion of the
/// Gibbs coupling of nu. After scaling alpha by 1 / (1 + slack+) the pair is
/// feasible, so dual_value lower-bounds R at that distortion.
DualCertificate dual_certificate(const ProbabilityVector& mu, const DistortionMatrix& rho,
                                 double beta, const ProbabilityVector& nu,
                                 std::optional<double> distortion = std::nullopt);

struct CurveShape {
  bool monotone = true;
  bool convex = true;
  double max_monotone_violation = 0.0;
  double max_convexity_violation = 0.0;
};

struct RDCurve {
  std::vector<RDPoint> points;  // increasing beta
  std::vector<bool> degraded;   // per point: solver did not converge

  bool all_converged() const;
  /// Monotonicity: D non-increasing and R non-decreasing in beta. Convexity:
  /// each point at most convex_tol (nats) above the chord of its neighbours.
  CurveShape shape(double monotone_tol = 1e-9, double convex_tol = 1e-8) const;
};

struct CurveOptions {
  BlahutOptions solver;
  bool warm_start = true;
  /// Uniform mass mixed into the previous nu* before the next beta.
  double warm_mix = 1e-6;
};

/// Sweeps beta (sorted ascending; duplicates rejected). Non-converged points
/// are kept and flagged as degraded instead of aborting the sweep.
RDCurve rd_curve(const ProbabilityVector& mu, const DistortionMatrix& rho,
                 std::vector<double> betas, const CurveOptions& options);

RDCurve rd_curve(const ProbabilityVector& mu, const DistortionMatrix& rho,
                 std::vector<double> betas, double tol, long max_iter);

/// Bracketed root finding on beta (Illinois steps with bisection fallback)
/// for a target distortion; D(beta) is non-increasing.
/// Targets at or above d_max return the beta = 0 point (R = 0) on the
/// d_max argmin atom. Accuracy: |D(beta) - target| <= 10 * tol * d_max.
RDPoint solve_for_distortion(const ProbabilityVector& mu, const DistortionMatrix& rho,
                             double target, const BlahutOptions& options);

}  // namespace rdbridge
