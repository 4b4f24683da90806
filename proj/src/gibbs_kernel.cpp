#include "gibbs_kernel.hpp"

#include <cmath>

#include "rdbridge/errors.hpp"
#include "rdbridge/logmath.hpp"
#include "rdbridge/parallel.hpp"

namespace rdbridge::detail {

namespace {

constexpr std::size_t kGrain = 32;

// out_r = ln sum_c exp(w_c) M_rc, with the exact fallback `exact(r)` when the
// shifted linear sum underflows.
template <class Exact>
void lse_matvec(const Matrix& m, const Vector& w, Vector& out, Exact&& exact) {
  out.resize(m.rows());
  double top = -kInf;
  for (Index c = 0; c < w.size(); ++c) top = std::max(top, w[c]);
  if (!std::isfinite(top)) {
    out.setConstant(-kInf);
    return;
  }
  Vector scaled(w.size());
  for (Index c = 0; c < w.size(); ++c) scaled[c] = std::exp(w[c] - top);
  const Index ncols = m.cols();
  parallel_for(static_cast<std::size_t>(m.rows()), kGrain, [&](std::size_t b, std::size_t e) {
    for (auto r = static_cast<Index>(b); r < static_cast<Index>(e); ++r) {
      const double* row = m.data() + r * ncols;
      double s = 0.0;
      for (Index c = 0; c < ncols; ++c) s += row[c] * scaled[c];
      out[r] = s >= GibbsKernel::kUnderflowGuard ? top + std::log(s) : exact(r);
    }
  });
}

}  // namespace

GibbsKernel::GibbsKernel(const DistortionMatrix& rho, double beta)
    : rho_(&rho), beta_(beta), k_(rho.rows(), rho.cols()), shift_(rho.rows()) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw InvalidInput("beta must be finite and >= 0");
  log_domain_ = beta * rho.max_finite() > kLogDomainThreshold;
  for (Index i = 0; i < rho.rows(); ++i) {
    double m = kInf;
    for (Index j = 0; j < rho.cols(); ++j) m = std::min(m, rho(i, j));
    if (!std::isfinite(m)) m = 0.0;
    shift_[i] = beta * m;
    for (Index j = 0; j < rho.cols(); ++j) {
      const double r = rho(i, j);
      k_(i, j) = std::isfinite(r) ? std::exp(-beta * (r - m)) : 0.0;
    }
  }
  kt_ = k_.transpose();
}

double GibbsKernel::log_entry(Index i, Index j) const {
  const double r = (*rho_)(i, j);
  if (!std::isfinite(r)) return -kInf;
  return -beta_ * r + shift_[i];
}

void GibbsKernel::row_lse(const Vector& w, Vector& out) const {
  lse_matvec(k_, w, out, [&](Index i) {
    return logsumexp_n(cols(), [&](long j) { return w[j] + log_entry(i, j); });
  });
}

void GibbsKernel::col_lse(const Vector& w, Vector& out) const {
  lse_matvec(kt_, w, out, [&](Index j) {
    return logsumexp_n(rows(), [&](long i) { return w[i] + log_entry(i, j); });
  });
}

void GibbsKernel::log_partition(const Vector& nu, Vector& log_z) const { row_lse(log_of(nu), log_z); }

void GibbsKernel::column_load(const Vector& mu, const Vector& log_z, Vector& c) const {
  Vector w(mu.size());
  for (Index i = 0; i < mu.size(); ++i)
    w[i] = mu[i] > 0.0 ? std::log(mu[i]) - log_z[i] : -kInf;
  col_lse(w, c);
  c = c.array().exp();
}

void GibbsKernel::conditional(Index i, const Vector& nu, double log_z,
                              Eigen::Ref<Vector> out) const {
  if (log_z > -700.0) {
    const double scale = std::exp(-log_z);
    for (Index j = 0; j < cols(); ++j) out[j] = nu[j] * k_(i, j) * scale;
  } else {
    for (Index j = 0; j < cols(); ++j)
      out[j] = nu[j] > 0.0 ? std::exp(std::log(nu[j]) + log_entry(i, j) - log_z) : 0.0;
  }
}

Vector log_of(const Vector& v) {
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) out[i] = safe_log(v[i]);
  return out;
}

}  // namespace rdbridge::detail
