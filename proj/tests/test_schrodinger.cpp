#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "rdbridge/blahut.hpp"
#include "rdbridge/schrodinger.hpp"

using namespace rdbridge;

namespace {
ProbabilityVector pv(std::initializer_list<double> w) { return ProbabilityVector(std::vector<double>(w)); }

ProbabilityVector random_simplex(Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  Vector w(n);
  for (Index j = 0; j < n; ++j) w[j] = u(rng);
  return ProbabilityVector::normalized(w);
}

// KL(pi || gamma), gamma_ij proportional to exp(-beta rho_ij) mu_i nu_j
double kl_to_reference(const Matrix& pi, const ProbabilityVector& mu, const ProbabilityVector& nu,
                       const Matrix& rho, double beta) {
  double z = 0.0;
  for (Index i = 0; i < pi.rows(); ++i)
    for (Index j = 0; j < pi.cols(); ++j) z += std::exp(-beta * rho(i, j)) * mu[i] * nu[j];
  double kl = 0.0;
  for (Index i = 0; i < pi.rows(); ++i)
    for (Index j = 0; j < pi.cols(); ++j) {
      if (pi(i, j) <= 0.0) continue;
      const double g = std::exp(-beta * rho(i, j)) * mu[i] * nu[j] / z;
      kl += pi(i, j) * std::log(pi(i, j) / g);
    }
  return kl;
}

// I(pi) + beta E_pi rho straight from the entries
double primal_value(const Matrix& pi, const ProbabilityVector& mu, const ProbabilityVector& nu,
                    const Matrix& rho, double beta) {
  double v = 0.0;
  for (Index i = 0; i < pi.rows(); ++i)
    for (Index j = 0; j < pi.cols(); ++j) {
      if (pi(i, j) <= 0.0) continue;
      v += pi(i, j) * (std::log(pi(i, j) / (mu[i] * nu[j])) + beta * rho(i, j));
    }
  return v;
}

// The 2x2 transport polytope is the segment pi_00 = t.
Matrix coupling_2x2(const ProbabilityVector& mu, const ProbabilityVector& nu, double t) {
  Matrix m(2, 2);
  m << t, mu[0] - t, nu[0] - t, mu[1] - nu[0] + t;
  return m;
}
}  // namespace

TEST_CASE("beta zero gives trivial potentials") {
  const ProbabilityVector mu = pv({0.2, 0.8}), nu = pv({0.6, 0.1, 0.3});
  Matrix m(2, 3);
  m << 0, 1, 2, 2, 1, 0;
  const SchrodingerSolution s = sinkhorn(mu, nu, DistortionMatrix(m), 0.0, 1e-12, 1000);
  CHECK(s.scaling.log_f.cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(s.scaling.log_g.cwiseAbs().maxCoeff() <= 1e-14);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 3; ++j) CHECK(std::abs(s.coupling(i, j) - mu[i] * nu[j]) <= 1e-15);
  CHECK(std::abs(eval_J(mu, nu, DistortionMatrix(m), 0.0, 0.7, s.scaling)) <= 1e-14);
  CHECK(std::abs(eval_L(mu, nu, DistortionMatrix(m), 0.0, s.scaling)) <= 1e-14);
}

TEST_CASE("symmetric 2x2 closed form") {
  const ProbabilityVector half = pv({0.5, 0.5});
  const SchrodingerSolution s = sinkhorn(half, half, hamming(2), 1.0, 1e-14, 1000);
  const double p00 = 1.0 / (2.0 * (1.0 + std::exp(-1.0)));
  CHECK(p00 == doctest::Approx(0.3655293).epsilon(1e-7));
  CHECK(std::abs(s.coupling(0, 0) - p00) <= 1e-12);
  CHECK(std::abs(s.coupling(1, 1) - p00) <= 1e-12);
  CHECK(std::abs(s.coupling(0, 1) - (0.5 - p00)) <= 1e-12);
  CHECK(s.scaling.log_g.cwiseAbs().maxCoeff() <= 1e-12);
  const SchrodingerResidual r = schrodinger_residual(half, half, hamming(2), s.scaling);
  CHECK(r.row <= 1e-12);
  CHECK(r.col <= 1e-12);
  CHECK(r.eq8 <= 1e-12);
}

TEST_CASE("converged solves meet their own tolerance and the gauge") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int t = 0; t < 10; ++t) {
    const ProbabilityVector mu = random_simplex(4, rng), nu = random_simplex(5, rng);
    Matrix m(4, 5);
    for (Index i = 0; i < 4; ++i)
      for (Index j = 0; j < 5; ++j) m(i, j) = u(rng);
    const DistortionMatrix rho(m);
    const double beta = 0.5 + t;
    const SchrodingerSolution s = sinkhorn(mu, nu, rho, beta, 1e-11, 100000);
    const SchrodingerResidual r = schrodinger_residual(mu, nu, rho, s.scaling);
    CHECK(r.row <= 1e-11);
    CHECK(r.col <= 1e-11);
    CHECK(r.eq8 <= 1e-11);
    CHECK(std::abs(nu.weights().dot(s.scaling.log_g)) <= 1e-12);
    CHECK(std::abs(s.coupling.joint().sum() - 1.0) <= 1e-10);

    // gauge uniqueness from a different start
    Vector g0(5);
    for (Index j = 0; j < 5; ++j) g0[j] = 3.0 * u(rng) - 3.0;
    const SchrodingerSolution s2 = sinkhorn_from(mu, nu, rho, beta, 1e-11, 100000, g0);
    CHECK((s.scaling.log_g - s2.scaling.log_g).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((s.scaling.log_f - s2.scaling.log_f).cwiseAbs().maxCoeff() <= 1e-8);

    // L >= 0 and the J identity against the coupling itself
    const double L = eval_L(mu, nu, rho, beta, s.scaling);
    CHECK(L >= -1e-9);
    const double d = 0.4;
    const double J = eval_J(mu, nu, rho, beta, d, s.scaling);
    const Matrix& pi = s.coupling.joint();
    double kl = 0.0, e = 0.0;
    for (Index i = 0; i < 4; ++i)
      for (Index j = 0; j < 5; ++j) {
        kl += pi(i, j) * std::log(pi(i, j) / (mu[i] * nu[j]));
        e += pi(i, j) * m(i, j);
      }
    CHECK(std::abs(J + beta * d - (kl + beta * e)) <= 1e-9);
  }
}

TEST_CASE("unconverged potentials leave residuals") {
  const ProbabilityVector mu = pv({0.3, 0.7}), nu = pv({0.5, 0.5});
  ScalingPair s;
  s.log_f = Vector::Zero(2);
  s.log_g = Vector::Zero(2);
  s.beta = 1.0;
  double z = 0.0;
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) z += mu[i] * nu[j] * std::exp(-hamming(2)(i, j));
  s.log_k = -std::log(z);
  const SchrodingerResidual r = schrodinger_residual(mu, nu, hamming(2), s);
  CHECK(r.col > 1e-3);
  CHECK(r.eq8 > 1e-3);

  s.marginal_residual = 1e-3;
  s.tol = 1e-10;
  CHECK_THROWS_AS(eval_J(mu, nu, hamming(2), 1.0, 0.1, s), StaleCertificate);
  CHECK_THROWS_AS(eval_L(mu, nu, hamming(2), 1.0, s), StaleCertificate);
}

TEST_CASE("failures") {
  const double inf = std::numeric_limits<double>::infinity();
  Matrix m(2, 2);
  m << 0, inf, inf, inf;
  CHECK_THROWS_AS(sinkhorn(pv({0.5, 0.5}), pv({0.5, 0.5}), DistortionMatrix(m), 1.0, 1e-10, 100),
                  InvalidInput);

  Matrix h(3, 3);
  h << 0, 1, 9, 1, 0, 1, 9, 1, 0;
  try {
    sinkhorn(pv({0.2, 0.3, 0.5}), pv({0.5, 0.3, 0.2}), DistortionMatrix(h), 4.0, 1e-14, 2);
    FAIL("expected a convergence failure");
  } catch (const SinkhornConvergenceError& e) {
    CHECK(e.partial().scaling.iterations == 2);
  }
}

TEST_CASE("at the BA optimum g is constant, L vanishes and J equals R") {
  const ProbabilityVector mu = pv({0.3, 0.7});
  for (double beta : {0.5, 2.0, 5.0}) {
    const RDPoint p =
        ba_fixed_point(mu, hamming(2), beta, ProbabilityVector::uniform(2), 1e-12, 100000);
    const SchrodingerSolution s = sinkhorn(mu, p.nu_star, hamming(2), beta, 1e-12, 100000);
    CHECK(s.scaling.g_spread(p.nu_star) <= 1e-6);
    CHECK(std::abs(eval_L(mu, p.nu_star, hamming(2), beta, s.scaling)) <= 1e-8);
    CHECK(std::abs(eval_J(mu, p.nu_star, hamming(2), beta, p.distortion, s.scaling) - p.rate) <=
          1e-8);

    // away from the optimum J stays above R at the same D
    for (double eps : {0.05, 0.3}) {
      const Vector w = (1 - eps) * p.nu_star.weights() + eps * Vector::Constant(2, 0.5);
      const ProbabilityVector nu = ProbabilityVector::normalized(w);
      const SchrodingerSolution sp = sinkhorn(mu, nu, hamming(2), beta, 1e-12, 100000);
      CHECK(eval_J(mu, nu, hamming(2), beta, p.distortion, sp.scaling) - p.rate >= -1e-9);
    }
  }
}

TEST_CASE("L at uniform nu against a brute-force primal minimization") {
  // Bernoulli(0.3), Hamming, beta = 2: inf over Pi(mu, nu) of I + beta E rho,
  // by golden section over the 2x2 transport segment, equals -sum mu ln Z + L.
  const ProbabilityVector mu = pv({0.3, 0.7}), nu = pv({0.5, 0.5});
  const double beta = 2.0;
  const Matrix rho = hamming(2).values();
  double lo = std::max(0.0, mu[0] + nu[0] - 1.0), hi = std::min(mu[0], nu[0]);
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int k = 0; k < 200; ++k) {
    const double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
    if (primal_value(coupling_2x2(mu, nu, a), mu, nu, rho, beta) <
        primal_value(coupling_2x2(mu, nu, b), mu, nu, rho, beta))
      hi = b;
    else
      lo = a;
  }
  const double best = primal_value(coupling_2x2(mu, nu, 0.5 * (lo + hi)), mu, nu, rho, beta);
  double log_z = 0.0;
  for (Index i = 0; i < 2; ++i)
    log_z += mu[i] * std::log(nu[0] * std::exp(-beta * rho(i, 0)) + nu[1] * std::exp(-beta * rho(i, 1)));
  const double l_oracle = best + log_z;

  const SchrodingerSolution s = sinkhorn(mu, nu, hamming(2), beta, 1e-13, 100000);
  const double L = eval_L(mu, nu, hamming(2), beta, s.scaling);
  CHECK(l_oracle > 1e-3);
  CHECK(L == doctest::Approx(l_oracle).epsilon(1e-8));
}

TEST_CASE("brute-force grid search never beats sinkhorn") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int t = 0; t < 5; ++t) {
    const ProbabilityVector mu = random_simplex(2, rng), nu = random_simplex(2, rng);
    Matrix m(2, 2);
    for (Index i = 0; i < 2; ++i)
      for (Index j = 0; j < 2; ++j) m(i, j) = u(rng);
    const double beta = 0.5 + t;
    const SchrodingerSolution s = sinkhorn(mu, nu, DistortionMatrix(m), beta, 1e-13, 100000);
    const double best = kl_to_reference(s.coupling.joint(), mu, nu, m, beta);
    const double lo = std::max(0.0, mu[0] + nu[0] - 1.0), hi = std::min(mu[0], nu[0]);
    double grid_min = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 10000; ++k) {
      const double tt = lo + (hi - lo) * k / 10000.0;
      grid_min = std::min(grid_min, kl_to_reference(coupling_2x2(mu, nu, tt), mu, nu, m, beta));
    }
    CHECK(best <= grid_min + 1e-8);
  }

  // 3x3: the polytope has four free entries
  const ProbabilityVector mu = pv({0.2, 0.3, 0.5}), nu = pv({0.4, 0.35, 0.25});
  Matrix m(3, 3);
  m << 0, 1, 4, 1, 0, 1, 4, 1, 0;
  const double beta = 1.3;
  const SchrodingerSolution s = sinkhorn(mu, nu, DistortionMatrix(m), beta, 1e-13, 100000);
  const double best = kl_to_reference(s.coupling.joint(), mu, nu, m, beta);
  const int n = 40;
  double grid_min = std::numeric_limits<double>::infinity();
  for (int a = 0; a <= n; ++a)
    for (int b = 0; b <= n; ++b)
      for (int c = 0; c <= n; ++c)
        for (int d = 0; d <= n; ++d) {
          Matrix p(3, 3);
          p(0, 0) = mu[0] * a / n;
          p(0, 1) = (mu[0] - p(0, 0)) * b / n;
          p(1, 0) = mu[1] * c / n;
          p(1, 1) = (mu[1] - p(1, 0)) * d / n;
          p(0, 2) = mu[0] - p(0, 0) - p(0, 1);
          p(1, 2) = mu[1] - p(1, 0) - p(1, 1);
          p(2, 0) = nu[0] - p(0, 0) - p(1, 0);
          p(2, 1) = nu[1] - p(0, 1) - p(1, 1);
          p(2, 2) = nu[2] - p(0, 2) - p(1, 2);
          if ((p.array() < 0.0).any()) continue;
          grid_min = std::min(grid_min, kl_to_reference(p, mu, nu, m, beta));
        }
  CHECK(std::isfinite(grid_min));
  CHECK(best <= grid_min + 1e-8);
}
