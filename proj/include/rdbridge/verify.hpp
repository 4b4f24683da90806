#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rdbridge/blahut.hpp"
#include "rdbridge/distortion.hpp"
#include "rdbridge/schrodinger.hpp"

namespace rdbridge {

/// Verdict thresholds sit an order of magnitude above the solver tolerances.
struct VerifyTolerances {
  double g_tol = 1e-5;
  double l_tol = 1e-7;
  double d_tol = 1e-6;
  double mass_threshold = 1e-6;
  double gap_cells = 3.0;
  double sinkhorn_tol = 1e-12;
  long sinkhorn_max_iter = 200000;
};

enum class Verdict { optimal, suboptimal, inconclusive };

std::string to_string(Verdict v);

struct OptimalityReport {
  double beta = 0.0;
  double distortion = 0.0;  // of the Gibbs coupling of nu
  double rate = 0.0;        // -sum mu ln Z - beta D for that coupling
  double g_spread = 0.0;
  double l_value = 0.0;
  double j_value = 0.0;
  double dual_gap = 0.0;
  double certificate_slack = 0.0;
  long sinkhorn_iterations = 0;
  Verdict verdict = Verdict::inconclusive;
  std::string diagnostics;
};

/// Tests whether nu is an optimal reconstruction at slope beta by three
/// independent routes: the Schrodinger potential g must be constant on
/// supp(nu), L(nu, beta) must vanish, and the Csiszar certificate built
/// from nu must close the duality gap. A Sinkhorn solve that does not
/// converge yields `inconclusive` rather than an exception.
OptimalityReport check_optimality(const ProbabilityVector& mu, const DistortionMatrix& rho,
                                  double beta, const ProbabilityVector& nu,
                                  const VerifyTolerances& tol = {});

/// H_b(p) - H_b(D) for 0 <= D < min(p, 1 - p), else 0. Nats.
double oracle_bernoulli_hamming(double p, double distortion);

/// max(0, 0.5 ln(sigma^2 / D)). Nats.
double oracle_gaussian_mse(double sigma, double distortion);

double binary_entropy(double p);

struct ComparisonRow {
  double beta = 0.0;
  double distortion = 0.0;
  double rate = 0.0;
  double oracle = 0.0;
  double error = 0.0;  // rate - oracle
  bool converged = true;
};

struct CurveComparison {
  double max_abs_err = 0.0;
  std::vector<ComparisonRow> rows;  // in curve order
};

/// Pointwise comparison against a closed form over points with D in
/// [d_lo, d_hi]. Throws EmptyComparison when no point falls in range.
CurveComparison compare_curve(const RDCurve& curve, const std::function<double(double)>& oracle,
                              double d_lo, double d_hi);

struct SupportCluster {
  double center = 0.0;  // mass-weighted
  double mass = 0.0;
  double width = 0.0;   // label span
  Index first = 0;
  Index last = 0;
};

/// Groups atoms with mass >= mass_threshold into clusters; a label gap of at
/// least gap_threshold between consecutive kept atoms starts a new cluster.
/// A grid proxy for isolated support points; it cannot see accumulation
/// points of a continuous support.
std::vector<SupportCluster> support_atoms(const ProbabilityVector& nu, double mass_threshold,
                                          double gap_threshold);

/// rate - max(0, SLB) at the point's distortion, using the source's
/// differential-entropy estimate. Squared-error losses only.
double slb_gap(const RDPoint& point, const SourceSpec& source, const DistortionMatrix& rho);

struct SupportReport {
  std::vector<SupportCluster> clusters;
  double covered_mass = 0.0;
  double slb_gap = 0.0;
  /// Smallest label distance between neighbouring clusters (+inf for < 2).
  double min_cluster_gap = 0.0;
};

/// support_atoms + slb_gap with the gap threshold expressed in grid cells
/// of the source (tol.gap_cells * smallest cell width).
SupportReport support_report(const RDPoint& point, const SourceSpec& source,
                             const DistortionMatrix& rho, const VerifyTolerances& tol = {});

}  // namespace rdbridge
