#include "rdbridge/verify.hpp"

#include <cmath>

#include "rdbridge/errors.hpp"
#include "rdbridge/logmath.hpp"

namespace rdbridge {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::optimal:
      return "optimal";
    case Verdict::suboptimal:
      return "suboptimal";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

OptimalityReport check_optimality(const ProbabilityVector& mu, const DistortionMatrix& rho,
                                  double beta, const ProbabilityVector& nu,
                                  const VerifyTolerances& tol) {
  OptimalityReport rep;
  rep.beta = beta;
  const RDValue value = rd_value_from_nu(mu, rho, beta, nu);
  rep.distortion = value.distortion;
  rep.rate = value.rate;
  const DualCertificate cert = dual_certificate(mu, rho, beta, nu, value.distortion);
  rep.certificate_slack = cert.slack;
  rep.dual_gap = value.rate - cert.dual_value;

  try {
    const SchrodingerSolution sol =
        sinkhorn(mu, nu, rho, beta, tol.sinkhorn_tol, tol.sinkhorn_max_iter);
    rep.sinkhorn_iterations = sol.scaling.iterations;
    rep.g_spread = sol.scaling.g_spread(nu);
    rep.l_value = eval_L(mu, nu, rho, beta, sol.scaling);
    rep.j_value = eval_J(mu, nu, rho, beta, value.distortion, sol.scaling);
  } catch (const SinkhornConvergenceError& e) {
    rep.sinkhorn_iterations = e.partial().scaling.iterations;
    rep.g_spread = e.partial().scaling.g_spread(nu);
    rep.verdict = Verdict::inconclusive;
    rep.diagnostics = e.what();
    return rep;
  }

  const bool g_ok = rep.g_spread <= tol.g_tol;
  const bool l_ok = std::abs(rep.l_value) <= tol.l_tol;
  const bool d_ok = rep.dual_gap <= tol.d_tol;
  rep.verdict = g_ok && l_ok && d_ok ? Verdict::optimal : Verdict::suboptimal;
  if (!g_ok) rep.diagnostics += "g not constant on supp(nu); ";
  if (!l_ok) rep.diagnostics += "L(nu,beta) nonzero; ";
  if (!d_ok) rep.diagnostics += "duality gap open (some atom outside supp(nu) is underused); ";
  if (!rep.diagnostics.empty()) rep.diagnostics.resize(rep.diagnostics.size() - 2);
  return rep;
}

double binary_entropy(double p) { return -xlogx(p) - xlogx(1.0 - p); }

double oracle_bernoulli_hamming(double p, double distortion) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidInput("oracle_bernoulli_hamming: p must lie in (0, 1)");
  if (!(distortion >= 0.0)) throw InvalidInput("oracle_bernoulli_hamming: D must be >= 0");
  if (distortion >= std::min(p, 1.0 - p)) return 0.0;
  return binary_entropy(p) - binary_entropy(distortion);
}

double oracle_gaussian_mse(double sigma, double distortion) {
  if (!(sigma > 0.0)) throw InvalidInput("oracle_gaussian_mse: sigma must be positive");
  if (!(distortion > 0.0)) throw InvalidInput("oracle_gaussian_mse: D must be positive");
  return std::max(0.0, 0.5 * std::log(sigma * sigma / distortion));
}

CurveComparison compare_curve(const RDCurve& curve, const std::function<double(double)>& oracle,
                              double d_lo, double d_hi) {
  CurveComparison out;
  for (std::size_t k = 0; k < curve.points.size(); ++k) {
    const RDPoint& p = curve.points[k];
    if (p.distortion < d_lo || p.distortion > d_hi) continue;
    ComparisonRow row;
    row.beta = p.beta;
    row.distortion = p.distortion;
    row.rate = p.rate;
    row.oracle = oracle(p.distortion);
    row.error = p.rate - row.oracle;
    row.converged = k >= curve.degraded.size() || !curve.degraded[k];
    out.max_abs_err = std::max(out.max_abs_err, std::abs(row.error));
    out.rows.push_back(row);
  }
  if (out.rows.empty())
    throw EmptyComparison("no curve point has distortion in [" + std::to_string(d_lo) + ", " +
                          std::to_string(d_hi) + "]");
  return out;
}

std::vector<SupportCluster> support_atoms(const ProbabilityVector& nu, double mass_threshold,
                                          double gap_threshold) {
  if (!nu.has_labels()) throw InvalidInput("support_atoms: reconstruction needs labels");
  const Vector& labels = *nu.labels();
  for (Index j = 1; j < labels.size(); ++j)
    if (!(labels[j] > labels[j - 1]))
      throw InvalidInput("support_atoms: labels must be strictly increasing");

  std::vector<SupportCluster> clusters;
  double weighted = 0.0;
  auto close = [&] {
    if (!clusters.empty() && clusters.back().mass > 0.0)
      clusters.back().center = weighted / clusters.back().mass;
  };
  Index prev = -1;
  for (Index j = 0; j < nu.size(); ++j) {
    if (nu[j] < mass_threshold || nu[j] <= 0.0) continue;
    if (prev < 0 || labels[j] - labels[prev] >= gap_threshold) {
      close();
      clusters.push_back({});
      clusters.back().first = j;
      weighted = 0.0;
    }
    SupportCluster& c = clusters.back();
    c.mass += nu[j];
    c.last = j;
    c.width = labels[j] - labels[c.first];
    weighted += nu[j] * labels[j];
    prev = j;
  }
  close();
  return clusters;
}

double slb_gap(const RDPoint& point, const SourceSpec& source, const DistortionMatrix& rho) {
  if (rho.kind() != LossKind::squared_error)
    throw InvalidInput("slb_gap: the Shannon lower bound here is for squared error only");
  const double slb = slb_mse(source.differential_entropy(), point.distortion);
  return point.rate - std::max(0.0, slb);
}

SupportReport support_report(const RDPoint& point, const SourceSpec& source,
                             const DistortionMatrix& rho, const VerifyTolerances& tol) {
  SupportReport rep;
  const double gap = tol.gap_cells * source.cell_widths.minCoeff();
  const ProbabilityVector nu =
      point.nu_star.has_labels() ? point.nu_star : point.nu_star.with_labels(source.grid);
  rep.clusters = support_atoms(nu, tol.mass_threshold, gap);
  for (const auto& c : rep.clusters) rep.covered_mass += c.mass;
  rep.min_cluster_gap = kInf;
  for (std::size_t k = 1; k < rep.clusters.size(); ++k) {
    const Vector& labels = *nu.labels();
    rep.min_cluster_gap = std::min(rep.min_cluster_gap, labels[rep.clusters[k].first] -
                                                            labels[rep.clusters[k - 1].last]);
  }
  rep.slb_gap = slb_gap(point, source, rho);
  return rep;
}

}  // namespace rdbridge
