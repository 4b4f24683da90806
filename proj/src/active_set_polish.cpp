#include "active_set_polish.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

#include "rdbridge/logmath.hpp"

namespace rdbridge::detail {

namespace {

constexpr int kMaxNewtonSteps = 60;
constexpr double kArmijo = 1e-4;
constexpr double kRelativeRidge = 1e-11;
constexpr double kRowLogFloor = -600.0;
constexpr int kRefinements = 3;
constexpr double kStartFraction = 1e-8;
constexpr double kDamping[] = {0.0, 1e-14, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4};

double kkt_violation(const Vector& x, const Vector& c) {
  double v = c.maxCoeff() - 1.0;
  for (Index j = 0; j < x.size(); ++j)
    if (x[j] > 0.0) v = std::max(v, std::abs(c[j] - 1.0));
  return v;
}

bool rows_representable(const Vector& mu, const Vector& log_z) {
  for (Index i = 0; i < mu.size(); ++i)
    if (mu[i] > 0.0 && !(log_z[i] > kRowLogFloor)) return false;
  return true;
}

double objective(const Vector& mu, const Vector& log_z, const Vector& x) {
  double f = x.sum();
  for (Index i = 0; i < mu.size(); ++i)
    if (mu[i] > 0.0) f -= mu[i] * log_z[i];
  return f;
}

}  // namespace

Vector nonneg_qp(const Eigen::MatrixXd& h, const Vector& b, const Vector& x0, int max_iter,
                 double enter_tol) {
  const Index n = b.size();
  Vector y = x0.cwiseMax(0.0);
  std::vector<char> active(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) active[static_cast<std::size_t>(j)] = y[j] > 0.0;
  std::vector<char> blocked(static_cast<std::size_t>(n), 0);
  Index just_added = -1;
  std::unordered_map<std::string, Index> entered_from;

  for (int iter = 0; iter < max_iter; ++iter) {
    std::vector<Index> idx;
    for (Index j = 0; j < n; ++j)
      if (active[static_cast<std::size_t>(j)]) idx.push_back(j);
    if (idx.empty()) break;

    // Jacobi-scaled block (unit diagonal; atom masses differ by orders of
    // magnitude). The ridge keeps the factorization stable; refinement
    // against the unridged block removes most of its bias.
    const Vector scale = h(idx, idx).diagonal().cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd hs = scale.asDiagonal() * h(idx, idx) * scale.asDiagonal();
    Eigen::MatrixXd hr = hs;
    hr.diagonal().array() += kRelativeRidge;
    const Eigen::LDLT<Eigen::MatrixXd> fact(hr);
    const Vector bs = scale.cwiseProduct(b(idx));
    Vector z = fact.solve(bs);
    for (int r = 0; r < kRefinements; ++r) z += fact.solve(bs - hs * z);
    z = scale.cwiseProduct(z);

    bool interior = true;
    for (Index k = 0; k < z.size(); ++k) interior = interior && z[k] > 0.0;

    if (interior) {
      y.setZero();
      y(idx) = z;
      // Exact arithmetic never revisits an active set at an interior point.
      // A repeat means a degenerate swap between nearly collinear columns;
      // the coordinate entered last time from here is refused from now on.
      const std::string key(active.begin(), active.end());
      const auto prior = entered_from.find(key);
      if (prior != entered_from.end()) {
        blocked[static_cast<std::size_t>(prior->second)] = 1;
      } else if (just_added >= 0) {
        // A coordinate that entered and survived moves y; earlier refusals
        // no longer apply.
        std::fill(blocked.begin(), blocked.end(), 0);
      }
      const Vector grad = h * y - b;
      Index enter = -1;
      double most = -enter_tol;
      for (Index j = 0; j < n; ++j)
        if (!active[static_cast<std::size_t>(j)] && !blocked[static_cast<std::size_t>(j)] &&
            grad[j] < most) {
          most = grad[j];
          enter = j;
        }
      if (enter < 0) return y;
      entered_from[key] = enter;

      // Enter along (-u, 1), u = H_AA^-1 h_Aj, up to the model minimizer or
      // the first active coordinate reaching zero, whichever comes first. A
      // re-solve would do the same in exact arithmetic, but when column j is
      // nearly dependent on the active ones its Schur complement is lost to
      // rounding and the re-solve can hand it a negative value.
      const Vector h_aj = scale.cwiseProduct(h(idx, enter));
      Vector u = fact.solve(h_aj);
      for (int r = 0; r < kRefinements; ++r) u += fact.solve(h_aj - hs * u);
      u = scale.cwiseProduct(u);
      const Vector h_raw = h(idx, enter);
      const double schur = h(enter, enter) - h_raw.dot(u);
      double delta = schur > 0.0 ? -most / schur : kInf;
      Index leave = -1;
      for (Index k = 0; k < u.size(); ++k) {
        if (!(u[k] > 0.0)) continue;
        const double limit = y[idx[static_cast<std::size_t>(k)]] / u[k];
        if (limit < delta) {
          delta = limit;
          leave = idx[static_cast<std::size_t>(k)];
        }
      }
      if (!(delta > 0.0) || !std::isfinite(delta)) {
        blocked[static_cast<std::size_t>(enter)] = 1;
        just_added = -1;
        continue;
      }
      for (Index k = 0; k < u.size(); ++k) {
        const Index j = idx[static_cast<std::size_t>(k)];
        y[j] = std::max(0.0, y[j] - delta * u[k]);
      }
      y[enter] = delta;
      active[static_cast<std::size_t>(enter)] = 1;
      if (leave >= 0) {
        y[leave] = 0.0;
        active[static_cast<std::size_t>(leave)] = 0;
      }
      just_added = enter;
      continue;
    }

    // Move toward z until the first coordinate hits zero; drop it.
    double t = 1.0;
    for (Index k = 0; k < z.size(); ++k) {
      const double yk = y[idx[static_cast<std::size_t>(k)]];
      if (z[k] <= 0.0) t = std::min(t, yk > 0.0 ? yk / (yk - z[k]) : 0.0);
    }
    for (Index k = 0; k < z.size(); ++k) {
      const Index j = idx[static_cast<std::size_t>(k)];
      y[j] += t * (z[k] - y[j]);
      if (y[j] <= 1e-300) {
        y[j] = 0.0;
        active[static_cast<std::size_t>(j)] = 0;
        if (j == just_added) blocked[static_cast<std::size_t>(j)] = 1;
      }
    }
    just_added = -1;
  }
  return y;
}

PolishStats polish_reconstruction(const GibbsKernel& kernel, const Vector& mu, Vector& x,
                                  double target, long iteration,
                                  std::vector<SupportEvent>& events) {
  PolishStats stats;
  const Index ny = kernel.cols();
  std::vector<Index> live_rows;
  for (Index i = 0; i < mu.size(); ++i)
    if (mu[i] > 0.0) live_rows.push_back(i);

  Vector log_z, c;
  kernel.log_partition(x, log_z);
  if (!rows_representable(mu, log_z)) return stats;
  kernel.column_load(mu, log_z, c);
  stats.kkt_before = kkt_violation(x, c);
  stats.kkt_after = stats.kkt_before;

  Eigen::MatrixXd w(static_cast<Index>(live_rows.size()), ny);
  for (int step = 0; step < kMaxNewtonSteps; ++step) {
    if (stats.kkt_after <= target) break;

    for (std::size_t r = 0; r < live_rows.size(); ++r) {
      const Index i = live_rows[r];
      const double s = std::sqrt(mu[i]) * std::exp(-log_z[i]);
      w.row(static_cast<Index>(r)) = s * kernel.kernel().row(i);
    }
    Eigen::MatrixXd h(ny, ny);
    h.setZero();
    h.selfadjointView<Eigen::Lower>().rankUpdate(w.transpose());
    h.triangularView<Eigen::StrictlyUpper>() = h.transpose();

    const Vector grad = Vector::Ones(ny) - c;
    const Vector b = h * x - grad;
    // Start the QP from the atoms that carry real mass, which is far cheaper
    // than dropping hundreds one at a time. Atoms already asking to enter
    // start active with a token mass: the QP drops reliably but enters
    // fragile when columns are nearly dependent.
    const double cut = kStartFraction * x.maxCoeff();
    Vector y0 = (x.array() >= cut).select(x, 0.0);
    for (Index j = 0; j < ny; ++j)
      if (y0[j] == 0.0 && grad[j] < -target) y0[j] = cut;

    // Near the optimum f is flat to rounding; a full step that does not
    // raise f and lowers the KKT violation is taken on that evidence alone.
    const double f0 = objective(mu, log_z, x);
    const double f_noise = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(f0));
    Vector trial, trial_log_z, trial_c;
    auto line_search = [&](const Vector& d) {
      const double slope = grad.dot(d);
      if (!(slope < f_noise)) return false;
      for (double t = 1.0; t > 1e-12; t *= 0.5) {
        trial = (x + t * d).cwiseMax(0.0);
        for (Index j = 0; j < ny; ++j)
          if (trial[j] < 1e-300) trial[j] = 0.0;
        kernel.log_partition(trial, trial_log_z);
        if (!rows_representable(mu, trial_log_z)) continue;
        const double f1 = objective(mu, trial_log_z, trial);
        if (slope < 0.0 && f1 <= f0 + kArmijo * t * slope) return true;
        if (t == 1.0 && f1 <= f0 + f_noise) {
          kernel.column_load(mu, trial_log_z, trial_c);
          if (kkt_violation(trial, trial_c) < stats.kkt_after) return true;
        }
      }
      return false;
    };

    // Plain Newton first. When rounding in the flat directions of H spoils
    // the direction, damp with lambda |y - x|^2 (Levenberg-Marquardt) until
    // a step is accepted.
    const double mean_diag = h.diagonal().mean();
    const int qp_iter = static_cast<int>(4 * ny + 50);
    bool accepted = false;
    for (double damping : kDamping) {
      Vector y;
      if (damping == 0.0) {
        y = nonneg_qp(h, b, y0, qp_iter, 0.01 * target);
      } else {
        const double lambda = damping * mean_diag;
        Eigen::MatrixXd hd = h;
        hd.diagonal().array() += lambda;
        y = nonneg_qp(hd, b + lambda * x, y0, qp_iter, 0.01 * target);
      }
      if (line_search(y - x)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;

    for (Index j = 0; j < ny; ++j) {
      const bool was = x[j] > 0.0;
      const bool is = trial[j] > 0.0;
      if (was != is) events.push_back({iteration, j, is});
    }
    x = trial;
    log_z = trial_log_z;
    kernel.column_load(mu, log_z, c);
    stats.kkt_after = kkt_violation(x, c);
    ++stats.newton_steps;
  }
  return stats;
}

}  // namespace rdbridge::detail
