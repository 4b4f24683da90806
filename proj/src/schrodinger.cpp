#include "rdbridge/schrodinger.hpp"

#include <cmath>
#include <string>

#include "gibbs_kernel.hpp"
#include "rdbridge/logmath.hpp"

namespace rdbridge {

namespace {

using detail::GibbsKernel;
using detail::log_of;

void check_dims(const ProbabilityVector& mu, const ProbabilityVector& nu,
                const DistortionMatrix& rho) {
  if (mu.size() != rho.rows() || nu.size() != rho.cols())
    throw InvalidInput("marginals do not match the loss dimensions");
}

void check_pair(const ProbabilityVector& mu, const ProbabilityVector& nu, double beta,
                const ScalingPair& scal) {
  if (scal.log_f.size() != mu.size() || scal.log_g.size() != nu.size())
    throw InvalidInput("scaling pair does not match the marginals");
  if (scal.beta != beta) throw InvalidInput("scaling pair was solved at a different beta");
}

void check_fresh(const ScalingPair& scal) {
  if (scal.marginal_residual > 10.0 * scal.tol)
    throw StaleCertificate("scaling pair marginal residual " +
                           std::to_string(scal.marginal_residual) + " exceeds 10 * tol");
}

// Log weights for a row-side reduction: ln mu_i + logF_i - shift_i.
Vector row_weights(const GibbsKernel& kern, const Vector& log_mu, const Vector& log_f) {
  Vector w(log_mu.size());
  for (Index i = 0; i < w.size(); ++i) w[i] = log_mu[i] + log_f[i] - kern.shift(i);
  return w;
}

struct Marginals {
  double row = 0.0;
  double col = 0.0;
  double col_relative = 0.0;
};

// Deviations of the induced coupling's marginals, given
// row_l = row_lse(ln nu + logG) and col_l = col_lse(ln mu + logF - shift).
Marginals marginal_deviation(const GibbsKernel& kern, const Vector& mu, const Vector& nu,
                             const ScalingPair& s, const Vector& row_l, const Vector& col_l) {
  Marginals m;
  for (Index i = 0; i < mu.size(); ++i) {
    if (!(mu[i] > 0.0)) continue;
    const double ratio = std::exp(s.log_k + s.log_f[i] - kern.shift(i) + row_l[i]);
    m.row = std::max(m.row, mu[i] * std::abs(ratio - 1.0));
  }
  for (Index j = 0; j < nu.size(); ++j) {
    if (!(nu[j] > 0.0)) continue;
    const double ratio = std::exp(s.log_k + s.log_g[j] + col_l[j]);
    m.col = std::max(m.col, nu[j] * std::abs(ratio - 1.0));
    m.col_relative = std::max(m.col_relative, std::abs(ratio - 1.0));
  }
  return m;
}

}  // namespace

double ScalingPair::g_spread(const ProbabilityVector& nu) const {
  double lo = kInf;
  double hi = -kInf;
  for (Index j = 0; j < nu.size(); ++j)
    if (nu[j] > 0.0) {
      lo = std::min(lo, log_g[j]);
      hi = std::max(hi, log_g[j]);
    }
  return hi >= lo ? hi - lo : 0.0;
}

SchrodingerSolution sinkhorn_from(const ProbabilityVector& mu, const ProbabilityVector& nu,
                                  const DistortionMatrix& rho, double beta, double tol,
                                  long max_iter, const Vector& log_g0) {
  check_dims(mu, nu, rho);
  if (!(tol > 0.0)) throw InvalidInput("sinkhorn: tol must be positive");
  if (max_iter < 1) throw InvalidInput("sinkhorn: max_iter must be >= 1");
  if (log_g0.size() != nu.size()) throw InvalidInput("sinkhorn: initial potential size mismatch");

  const GibbsKernel kern(rho, beta);
  const Vector& w_mu = mu.weights();
  const Vector& w_nu = nu.weights();
  const Vector log_mu = log_of(w_mu);
  const Vector log_nu = log_of(w_nu);

  Vector row_l, col_l;
  kern.row_lse(log_nu, row_l);
  for (Index i = 0; i < w_mu.size(); ++i)
    if (w_mu[i] > 0.0 && !(row_l[i] > -kInf))
      throw InvalidInput("infeasible reference: source atom " + std::to_string(i) +
                         " has no reconstruction of finite loss in supp(nu)");
  kern.col_lse(row_weights(kern, log_mu, Vector::Zero(w_mu.size())), col_l);
  for (Index j = 0; j < w_nu.size(); ++j)
    if (w_nu[j] > 0.0 && !(col_l[j] > -kInf))
      throw InvalidInput("infeasible reference: reconstruction atom " + std::to_string(j) +
                         " has no source of finite loss in supp(mu)");

  ScalingPair s;
  s.beta = beta;
  s.tol = tol;
  {
    Vector total(w_mu.size());
    for (Index i = 0; i < w_mu.size(); ++i) total[i] = log_mu[i] - kern.shift(i) + row_l[i];
    s.log_k = -logsumexp(std::span<const double>(total.data(), static_cast<std::size_t>(total.size())));
  }
  s.log_g = Vector::Zero(w_nu.size());
  for (Index j = 0; j < w_nu.size(); ++j)
    if (w_nu[j] > 0.0) s.log_g[j] = log_g0[j];
  s.log_f = Vector::Zero(w_mu.size());

  auto update_f = [&] {
    kern.row_lse(log_nu + s.log_g, row_l);
    for (Index i = 0; i < w_mu.size(); ++i)
      s.log_f[i] = w_mu[i] > 0.0 ? -s.log_k - (row_l[i] - kern.shift(i)) : 0.0;
  };

  update_f();
  Marginals dev;
  bool converged = false;
  while (true) {
    kern.col_lse(row_weights(kern, log_mu, s.log_f), col_l);
    dev = marginal_deviation(kern, w_mu, w_nu, s, row_l, col_l);
    s.marginal_residual = std::max(dev.row, dev.col);
    if (dev.col_relative <= tol && s.marginal_residual <= tol) {
      converged = true;
      break;
    }
    if (s.iterations >= max_iter) break;
    for (Index j = 0; j < w_nu.size(); ++j)
      s.log_g[j] = w_nu[j] > 0.0 ? -s.log_k - col_l[j] : 0.0;
    update_f();
    ++s.iterations;
  }

  double gauge = 0.0;
  for (Index j = 0; j < w_nu.size(); ++j)
    if (w_nu[j] > 0.0) gauge += w_nu[j] * s.log_g[j];
  for (Index j = 0; j < w_nu.size(); ++j)
    if (w_nu[j] > 0.0) s.log_g[j] -= gauge;
  for (Index i = 0; i < w_mu.size(); ++i)
    if (w_mu[i] > 0.0) s.log_f[i] += gauge;

  SchrodingerSolution out{s, Coupling(induced_coupling(mu, nu, rho, s))};
  if (!converged)
    throw SinkhornConvergenceError("sinkhorn did not converge within " + std::to_string(max_iter) +
                                       " iterations (marginal residual " +
                                       std::to_string(s.marginal_residual) + ")",
                                   std::move(out));
  return out;
}

SchrodingerSolution sinkhorn(const ProbabilityVector& mu, const ProbabilityVector& nu,
                             const DistortionMatrix& rho, double beta, double tol, long max_iter) {
  return sinkhorn_from(mu, nu, rho, beta, tol, max_iter, Vector::Zero(nu.size()));
}

Matrix induced_coupling(const ProbabilityVector& mu, const ProbabilityVector& nu,
                        const DistortionMatrix& rho, const ScalingPair& scal) {
  check_dims(mu, nu, rho);
  const GibbsKernel kern(rho, scal.beta);
  Matrix joint = Matrix::Zero(rho.rows(), rho.cols());
  for (Index i = 0; i < rho.rows(); ++i) {
    if (!(mu[i] > 0.0)) continue;
    const double base = std::log(mu[i]) + scal.log_k + scal.log_f[i];
    for (Index j = 0; j < rho.cols(); ++j) {
      if (!(nu[j] > 0.0)) continue;
      const double e = kern.log_entry(i, j);
      if (e == -kInf) continue;
      joint(i, j) = std::exp(base + std::log(nu[j]) + scal.log_g[j] + e - kern.shift(i));
    }
  }
  const double total = joint.sum();
  if (total > 0.0 && std::abs(total - 1.0) <= 1e-9) joint /= total;
  return joint;
}

double eval_J(const ProbabilityVector& mu, const ProbabilityVector& nu,
              const DistortionMatrix& rho, double beta, double distortion,
              const ScalingPair& scal) {
  check_dims(mu, nu, rho);
  check_pair(mu, nu, beta, scal);
  check_fresh(scal);
  const GibbsKernel kern(rho, beta);
  Vector row_g;
  kern.row_lse(log_of(nu.weights()) + scal.log_g, row_g);
  double j_value = -beta * distortion;
  for (Index i = 0; i < mu.size(); ++i)
    if (mu[i] > 0.0) j_value -= mu[i] * (row_g[i] - kern.shift(i));
  for (Index j = 0; j < nu.size(); ++j)
    if (nu[j] > 0.0) j_value += nu[j] * scal.log_g[j];
  return j_value;
}

double eval_L(const ProbabilityVector& mu, const ProbabilityVector& nu,
              const DistortionMatrix& rho, double beta, const ScalingPair& scal) {
  check_dims(mu, nu, rho);
  check_pair(mu, nu, beta, scal);
  check_fresh(scal);
  const GibbsKernel kern(rho, beta);
  const Vector log_nu = log_of(nu.weights());
  Vector row_plain, row_g;
  kern.row_lse(log_nu, row_plain);
  kern.row_lse(log_nu + scal.log_g, row_g);
  double l_value = 0.0;
  for (Index i = 0; i < mu.size(); ++i)
    if (mu[i] > 0.0) l_value += mu[i] * (row_plain[i] - row_g[i]);
  for (Index j = 0; j < nu.size(); ++j)
    if (nu[j] > 0.0) l_value += nu[j] * scal.log_g[j];
  return l_value;
}

SchrodingerResidual schrodinger_residual(const ProbabilityVector& mu, const ProbabilityVector& nu,
                                         const DistortionMatrix& rho, const ScalingPair& scal) {
  check_dims(mu, nu, rho);
  if (scal.log_f.size() != mu.size() || scal.log_g.size() != nu.size())
    throw InvalidInput("scaling pair does not match the marginals");
  const GibbsKernel kern(rho, scal.beta);
  const Vector log_mu = log_of(mu.weights());
  Vector row_l, col_l;
  kern.row_lse(log_of(nu.weights()) + scal.log_g, row_l);
  kern.col_lse(row_weights(kern, log_mu, scal.log_f), col_l);
  const Marginals dev = marginal_deviation(kern, mu.weights(), nu.weights(), scal, row_l, col_l);

  // Third equation: involves g alone, with f eliminated through the first.
  Vector w(mu.size()), col_eq8;
  for (Index i = 0; i < mu.size(); ++i) w[i] = mu[i] > 0.0 ? log_mu[i] - row_l[i] : -kInf;
  kern.col_lse(w, col_eq8);
  double eq8 = 0.0;
  for (Index j = 0; j < nu.size(); ++j)
    if (nu[j] > 0.0) eq8 = std::max(eq8, std::abs(std::exp(scal.log_g[j] + col_eq8[j]) - 1.0));
  return {dev.row, dev.col, eq8};
}

}  // namespace rdbridge
