#include "rdbridge/blahut.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "active_set_polish.hpp"
#include "gibbs_kernel.hpp"
#include "rdbridge/logmath.hpp"
#include "rdbridge/parallel.hpp"

namespace rdbridge {

namespace {

constexpr double kZeroMass = 1e-300;
// At exit, an atom whose column load sits this far below 1 is on its way to
// zero; plain steps would need thousands of iterations to get there, so it
// is dropped once its own step is within tol.
constexpr double kPruneGap = 1e-3;

using detail::GibbsKernel;

void check_problem(const ProbabilityVector& mu, const DistortionMatrix& rho, double beta,
                   const ProbabilityVector& nu) {
  if (mu.size() != rho.rows())
    throw InvalidInput("source has " + std::to_string(mu.size()) + " atoms, loss has " +
                       std::to_string(rho.rows()) + " rows");
  if (nu.size() != rho.cols())
    throw InvalidInput("reconstruction has " + std::to_string(nu.size()) + " atoms, loss has " +
                       std::to_string(rho.cols()) + " columns");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw InvalidInput("beta must be finite and >= 0");
}

void check_partition(const Vector& mu, const Vector& log_z) {
  for (Index i = 0; i < mu.size(); ++i)
    if (mu[i] > 0.0 && !(log_z[i] > -kInf))
      throw InvalidInput("partition function of source atom " + std::to_string(i) +
                         " is zero: no reachable reconstruction at finite loss");
}

// D and R for the Gibbs coupling of nu, given shifted log partitions.
RDValue gibbs_value(const GibbsKernel& kern, const Vector& mu, const Vector& nu,
                    const Vector& log_z) {
  const auto& rho = kern.loss();
  Vector cond(kern.cols());
  double d = 0.0;
  double neg_log_z = 0.0;
  for (Index i = 0; i < kern.rows(); ++i) {
    if (!(mu[i] > 0.0)) continue;
    kern.conditional(i, nu, log_z[i], cond);
    double row = 0.0;
    for (Index j = 0; j < kern.cols(); ++j)
      if (cond[j] > 0.0) row += cond[j] * rho(i, j);
    d += mu[i] * row;
    neg_log_z -= mu[i] * (log_z[i] - kern.shift(i));
  }
  return {d, neg_log_z - kern.beta() * d};
}

DualCertificate certificate(const GibbsKernel& kern, const Vector& mu, const Vector& log_z,
                            double distortion) {
  DualCertificate cert;
  cert.alpha.resize(mu.size());
  double value = 0.0;
  for (Index i = 0; i < mu.size(); ++i) {
    const double log_alpha = -(log_z[i] - kern.shift(i));
    cert.alpha[i] = std::exp(log_alpha);
    if (mu[i] > 0.0) value += mu[i] * log_alpha;
  }
  kern.column_load(mu, log_z, cert.column_load);
  cert.slack = cert.column_load.maxCoeff() - 1.0;
  cert.dual_value = value - std::log1p(std::max(cert.slack, 0.0)) - kern.beta() * distortion;
  return cert;
}

// Drops light atoms that the KKT conditions put outside the support, keeping
// the result only when the certificate still holds afterwards.
void prune_inactive(const GibbsKernel& kern, const Vector& mu, const Vector& load, Vector& nu,
                    double tol, double slack_tol, RDPoint& pt) {
  Vector pruned = nu;
  std::vector<Index> dropped;
  for (Index j = 0; j < nu.size(); ++j)
    if (nu[j] > 0.0 && load[j] <= 1.0 - kPruneGap && nu[j] * (1.0 - load[j]) <= tol) {
      pruned[j] = 0.0;
      dropped.push_back(j);
    }
  if (dropped.empty()) return;
  pruned /= pruned.sum();
  Vector log_z, c;
  kern.log_partition(pruned, log_z);
  kern.column_load(mu, log_z, c);
  if (c.maxCoeff() - 1.0 > slack_tol) return;
  nu.swap(pruned);
  for (Index j : dropped) pt.support_events.push_back({pt.iterations, j, false});
}

std::optional<Vector> labels_of(const ProbabilityVector& nu) { return nu.labels(); }

}  // namespace

RDPoint ba_fixed_point(const ProbabilityVector& mu, const DistortionMatrix& rho, double beta,
                       const ProbabilityVector& nu0, const BlahutOptions& options) {
  check_problem(mu, rho, beta, nu0);
  if (!(options.tol > 0.0)) throw InvalidInput("tol must be positive");
  if (!(options.slack_tol > 0.0)) throw InvalidInput("slack_tol must be positive");
  if (options.max_iter < 1) throw InvalidInput("max_iter must be >= 1");

  const GibbsKernel kern(rho, beta);
  const Vector& w = mu.weights();
  Vector nu = nu0.weights();
  for (Index j = 0; j < nu.size(); ++j)
    if (nu[j] < kZeroMass) nu[j] = 0.0;

  RDPoint pt;
  pt.beta = beta;
  Vector log_z, load, next;
  double residual = kInf;
  double slack = kInf;
  long next_polish = options.polish_after;
  int polish_rounds = 0;

  while (pt.iterations < options.max_iter) {
    kern.log_partition(nu, log_z);
    check_partition(w, log_z);
    kern.column_load(w, log_z, load);
    slack = load.maxCoeff() - 1.0;
    next = nu.cwiseProduct(load);
    ++pt.iterations;
    for (Index j = 0; j < next.size(); ++j)
      if (next[j] < kZeroMass && next[j] != 0.0) {
        next[j] = 0.0;
        pt.support_events.push_back({pt.iterations, j, false});
      } else if (next[j] == 0.0 && nu[j] > 0.0) {
        pt.support_events.push_back({pt.iterations, j, false});
      }
    residual = (next - nu).cwiseAbs().maxCoeff();
    nu.swap(next);
    if (options.record_residuals) pt.residual_history.push_back(residual);
    if (residual <= options.tol && slack <= options.slack_tol) {
      pt.converged = true;
      prune_inactive(kern, w, load, nu, options.tol, options.slack_tol, pt);
      break;
    }
    if (options.polish && pt.iterations >= next_polish && polish_rounds < options.max_polish_rounds) {
      const double target = 0.01 * options.slack_tol;
      const auto stats =
          detail::polish_reconstruction(kern, w, nu, target, pt.iterations, pt.support_events);
      ++polish_rounds;
      // A polish that fell short gets another go soon, from the point the
      // plain iteration has moved it to.
      next_polish = pt.iterations +
                    (stats.kkt_after <= target ? options.polish_every : options.polish_after);
    }
  }

  pt.nu_star = ProbabilityVector::normalized(nu, labels_of(nu0));
  kern.log_partition(pt.nu_star.weights(), log_z);
  check_partition(w, log_z);
  const RDValue value = gibbs_value(kern, w, pt.nu_star.weights(), log_z);
  pt.distortion = value.distortion;
  pt.rate = value.rate;
  pt.fixpoint_residual = residual;
  pt.certificate_slack = certificate(kern, w, log_z, value.distortion).slack;

  if (!pt.converged)
    throw BlahutConvergenceError("fixed-point iteration did not converge at beta=" +
                                     std::to_string(beta) + " within " +
                                     std::to_string(options.max_iter) + " iterations (residual " +
                                     std::to_string(residual) + ", slack " +
                                     std::to_string(slack) + ")",
                                 pt);
  return pt;
}

RDPoint ba_fixed_point(const ProbabilityVector& mu, const DistortionMatrix& rho, double beta,
                       const ProbabilityVector& nu0, double tol, long max_iter) {
  BlahutOptions options;
  options.tol = tol;
  options.max_iter = max_iter;
  return ba_fixed_point(mu, rho, beta, nu0, options);
}

RDValue rd_value_from_nu(const ProbabilityVector& mu, const DistortionMatrix& rho, double beta,
                         const ProbabilityVector& nu) {
  check_problem(mu, rho, beta, nu);
  const GibbsKernel kern(rho, beta);
  Vector log_z;
  kern.log_partition(nu.weights(), log_z);
  check_partition(mu.weights(), log_z);
  return gibbs_value(kern, mu.weights(), nu.weights(), log_z);
}

Coupling gibbs_coupling(const ProbabilityVector& mu, const DistortionMatrix& rho, double beta,
                        const ProbabilityVector& nu) {
  check_problem(mu, rho, beta, nu);
  const GibbsKernel kern(rho, beta);
  Vector log_z;
  kern.log_partition(nu.weights(), log_z);
  check_partition(mu.weights(), log_z);
  Matrix joint = Matrix::Zero(rho.rows(), rho.cols());
  Vector cond(rho.cols());
  for (Index i = 0; i < rho.rows(); ++i) {
    if (!(mu[i] > 0.0)) continue;
    kern.conditional(i, nu.weights(), log_z[i], cond);
    joint.row(i) = mu[i] * cond.transpose();
  }
  // Rounding can leave the total a few ulps off; rows are mu up to that.
  const double total = joint.sum();
  if (total > 0.0) joint /= total;
  return Coupling(std::move(joint));
}

DualCertificate dual_certificate(const ProbabilityVector& mu, const DistortionMatrix& rho,
                                 double beta, const ProbabilityVector& nu,
                                 std::optional<double> distortion) {
  check_problem(mu, rho, beta, nu);
  const GibbsKernel kern(rho, beta);
  Vector log_z;
  kern.log_partition(nu.weights(), log_z);
  check_partition(mu.weights(), log_z);
  const double d = distortion ? *distortion
                              : gibbs_value(kern, mu.weights(), nu.weights(), log_z).distortion;
  return certificate(kern, mu.weights(), log_z, d);
}

bool RDCurve::all_converged() const {
  return std::none_of(degraded.begin(), degraded.end(), [](bool b) { return b; });
}

CurveShape RDCurve::shape(double monotone_tol, double convex_tol) const {
  CurveShape s;
  for (std::size_t k = 1; k < points.size(); ++k) {
    const double d_up = points[k].distortion - points[k - 1].distortion;
    const double r_down = points[k - 1].rate - points[k].rate;
    s.max_monotone_violation = std::max({s.max_monotone_violation, d_up, r_down});
  }
  s.monotone = s.max_monotone_violation <= monotone_tol;

  // Each middle point must lie on or below the chord of its neighbours,
  // measured in rate. Triples spanning no distortion carry no information.
  constexpr double kFlat = 1e-12;
  for (std::size_t k = 2; k < points.size(); ++k) {
    const RDPoint& a = points[k - 2];
    const RDPoint& b = points[k - 1];
    const RDPoint& c = points[k];
    const double span = c.distortion - a.distortion;
    if (std::abs(span) <= kFlat) continue;
    const double t = (b.distortion - a.distortion) / span;
    const double chord = a.rate + t * (c.rate - a.rate);
    s.max_convexity_violation = std::max(s.max_convexity_violation, b.rate - chord);
  }
  s.convex = s.max_convexity_violation <= convex_tol;
  return s;
}

RDCurve rd_curve(const ProbabilityVector& mu, const DistortionMatrix& rho,
                 std::vector<double> betas, const CurveOptions& options) {
  if (betas.empty()) throw InvalidInput("rd_curve: empty beta list");
  for (double b : betas)
    if (!(b > 0.0) || !std::isfinite(b)) throw InvalidInput("rd_curve: betas must be positive");
  std::sort(betas.begin(), betas.end());
  if (std::adjacent_find(betas.begin(), betas.end()) != betas.end())
    throw InvalidInput("rd_curve: duplicate beta");

  const auto n = betas.size();
  RDCurve curve;
  curve.points.resize(n);
  curve.degraded.assign(n, false);
  const ProbabilityVector start = ProbabilityVector::uniform(rho.cols());

  auto solve = [&](std::size_t k, const ProbabilityVector& nu0) {
    try {
      curve.points[k] = ba_fixed_point(mu, rho, betas[k], nu0, options.solver);
    } catch (const BlahutConvergenceError& e) {
      curve.points[k] = e.partial();
      curve.degraded[k] = true;
    }
  };

  if (options.warm_start) {
    ProbabilityVector nu0 = start;
    for (std::size_t k = 0; k < n; ++k) {
      solve(k, nu0);
      Vector mixed = (1.0 - options.warm_mix) * curve.points[k].nu_star.weights() +
                     options.warm_mix * start.weights();
      nu0 = ProbabilityVector::normalized(std::move(mixed), curve.points[k].nu_star.labels());
    }
  } else {
    std::vector<char> flags(n, 0);
    parallel_for(n, 1, [&](std::size_t b, std::size_t e) {
      for (std::size_t k = b; k < e; ++k) {
        try {
          curve.points[k] = ba_fixed_point(mu, rho, betas[k], start, options.solver);
        } catch (const BlahutConvergenceError& err) {
          curve.points[k] = err.partial();
          flags[k] = 1;
        }
      }
    });
    for (std::size_t k = 0; k < n; ++k) curve.degraded[k] = flags[k] != 0;
  }
  return curve;
}

RDCurve rd_curve(const ProbabilityVector& mu, const DistortionMatrix& rho,
                 std::vector<double> betas, double tol, long max_iter) {
  CurveOptions options;
  options.solver.tol = tol;
  options.solver.max_iter = max_iter;
  return rd_curve(mu, rho, std::move(betas), options);
}

RDPoint solve_for_distortion(const ProbabilityVector& mu, const DistortionMatrix& rho,
                             double target, const BlahutOptions& options) {
  const DMax top = d_max(mu, rho);
  const double floor = d_floor(mu, rho);
  if (!(target > floor)) throw InvalidInput("target distortion must exceed d_floor (R is infinite below it)");
  const ProbabilityVector edge = ProbabilityVector::point_mass(rho.cols(), top.argmin);
  if (target >= top.value) return ba_fixed_point(mu, rho, 0.0, edge, options);

  const double accuracy = 10.0 * options.tol * top.value;
  const Vector spread = ProbabilityVector::uniform(rho.cols()).weights();
  ProbabilityVector warm = ProbabilityVector::uniform(rho.cols());
  // Each solve starts from the last nu*, as a curve sweep would.
  auto at = [&](double beta) {
    RDPoint p = ba_fixed_point(mu, rho, beta, warm, options);
    warm = ProbabilityVector::normalized((1.0 - 1e-6) * p.nu_star.weights() + 1e-6 * spread);
    return p;
  };

  // Bracket: D(lo) > target >= D(hi), with D(0+) = d_max.
  double lo = 0.0;
  double f_lo = top.value - target;
  double hi = 1.0;
  RDPoint best = at(hi);
  while (best.distortion > target) {
    lo = hi;
    f_lo = best.distortion - target;
    hi *= 2.0;
    if (hi > 1e12) throw InvalidInput("target distortion not reachable by any finite beta");
    best = at(hi);
  }
  double f_hi = best.distortion - target;

  // Illinois steps inside the bracket; a bisection step whenever the
  // interpolate lands too close to an end.
  int kept_side = 0;
  for (int step = 0; step < 200 && std::abs(best.distortion - target) > accuracy; ++step) {
    double mid = hi - f_hi * (hi - lo) / (f_hi - f_lo);
    const double margin = 1e-3 * (hi - lo);
    if (!(mid > lo + margin && mid < hi - margin)) mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    RDPoint p = at(mid);
    const double f = p.distortion - target;
    if (f > 0.0) {
      lo = mid;
      f_lo = f;
      if (kept_side == 1) f_hi *= 0.5;
      kept_side = 1;
    } else {
      hi = mid;
      f_hi = f;
      if (kept_side == -1) f_lo *= 0.5;
      kept_side = -1;
    }
    if (std::abs(f) < std::abs(best.distortion - target)) best = std::move(p);
  }
  if (std::abs(best.distortion - target) > accuracy)
    throw BlahutConvergenceError(
        "bisection on beta could not match the target distortion (R(D) has a linear segment "
        "there, so D(beta) jumps)",
        best);
  return best;
}

}  // namespace rdbridge
