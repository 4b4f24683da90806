#include <cmath>
#include <random>

#include "doctest.h"
#include "rdbridge/verify.hpp"

using namespace rdbridge;

namespace {
double hb(double p) { return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p); }
}  // namespace

TEST_CASE("oracles") {
  CHECK(oracle_bernoulli_hamming(0.5, 0.1) == doctest::Approx(std::log(2.0) - hb(0.1)).epsilon(1e-14));
  CHECK(oracle_bernoulli_hamming(0.5, 0.1) == doctest::Approx(0.3680642).epsilon(1e-7));
  CHECK(oracle_bernoulli_hamming(0.3, 0.3) == 0.0);
  CHECK(oracle_bernoulli_hamming(0.3, 0.01) == doctest::Approx(0.5548628).epsilon(1e-7));
  CHECK(oracle_bernoulli_hamming(0.3, 0.01) == doctest::Approx(hb(0.3) - hb(0.01)));
  CHECK_THROWS_AS(oracle_bernoulli_hamming(1.0, 0.1), InvalidInput);
  CHECK_THROWS_AS(oracle_bernoulli_hamming(0.0, 0.1), InvalidInput);

  CHECK(oracle_gaussian_mse(1.0, 1.0) == 0.0);
  CHECK(oracle_gaussian_mse(1.0, 0.25) == doctest::Approx(std::log(2.0)));
  CHECK(oracle_gaussian_mse(2.0, 1.0) == doctest::Approx(std::log(2.0)));
  CHECK(oracle_gaussian_mse(1.0, 3.0) == 0.0);
}

TEST_CASE("check_optimality verdicts") {
  const ProbabilityVector mu = bernoulli(0.3);
  const RDPoint p = ba_fixed_point(mu, hamming(2), 2.0, ProbabilityVector::uniform(2), 1e-12, 100000);
  const OptimalityReport good = check_optimality(mu, hamming(2), 2.0, p.nu_star);
  CHECK(good.verdict == Verdict::optimal);
  CHECK(good.g_spread <= 1e-6);
  CHECK(std::abs(good.l_value) <= 1e-8);
  CHECK(good.diagnostics.empty());

  const OptimalityReport bad = check_optimality(mu, hamming(2), 2.0, ProbabilityVector::uniform(2));
  CHECK(bad.verdict == Verdict::suboptimal);
  CHECK(bad.l_value > 0.0);
  CHECK_FALSE(bad.diagnostics.empty());

  const OptimalityReport zero =
      check_optimality(mu, hamming(2), 0.0, ProbabilityVector(std::vector<double>{0.2, 0.8}));
  CHECK(zero.verdict == Verdict::optimal);
  CHECK(std::abs(zero.rate) <= 1e-15);
  CHECK(std::abs(zero.l_value) <= 1e-14);

  VerifyTolerances tight;
  tight.sinkhorn_max_iter = 1;
  const SourceSpec g = discretize_gaussian(1.0, 6.0, 33);
  const OptimalityReport inc = check_optimality(g.weights, squared_error(g.grid, g.grid), 3.0,
                                                ProbabilityVector::uniform(33), tight);
  CHECK(inc.verdict == Verdict::inconclusive);
  CHECK_FALSE(inc.diagnostics.empty());
}

TEST_CASE("optimal nu passes and every perturbation fails") {
  std::mt19937_64 rng(21);
  std::exponential_distribution<double> e(1.0);
  const SourceSpec g = discretize_gaussian(1.0, 6.0, 65);
  const DistortionMatrix se = squared_error(g.grid, g.grid);
  struct Case {
    ProbabilityVector mu;
    DistortionMatrix rho;
    double beta;
  };
  const std::vector<Case> cases = {{bernoulli(0.3), hamming(2), 2.0},
                                   {ProbabilityVector(std::vector<double>{0.5, 0.3, 0.2}), hamming(3), 3.0},
                                   {g.weights, se, 2.0}};
  const VerifyTolerances tol;
  for (const Case& c : cases) {
    const Index n = c.rho.cols();
    const RDPoint p = ba_fixed_point(c.mu, c.rho, c.beta, ProbabilityVector::uniform(n), 1e-10, 100000);
    CHECK(check_optimality(c.mu, c.rho, c.beta, p.nu_star).verdict == Verdict::optimal);
    for (int t = 0; t < 20; ++t) {
      Vector dir(n);
      for (Index j = 0; j < n; ++j) dir[j] = e(rng);
      dir /= dir.sum();
      const double eps = t % 2 ? 0.05 : 0.2;
      const ProbabilityVector nu =
          ProbabilityVector::normalized((1 - eps) * p.nu_star.weights() + eps * dir);
      const OptimalityReport r = check_optimality(c.mu, c.rho, c.beta, nu);
      CHECK((r.g_spread > tol.g_tol || r.l_value > tol.l_tol));
      CHECK(r.verdict == Verdict::suboptimal);
    }
  }
}

TEST_CASE("compare_curve") {
  std::vector<double> betas;
  for (int k = 0; k < 15; ++k) betas.push_back(0.1 * std::pow(200.0, k / 14.0));
  const RDCurve c = rd_curve(bernoulli(0.3), hamming(2), betas, 1e-10, 100000);
  auto oracle = [](double d) { return oracle_bernoulli_hamming(0.3, d); };
  const CurveComparison cmp = compare_curve(c, oracle, 0.01, 0.29);
  CHECK(cmp.max_abs_err <= 1e-6);
  CHECK_FALSE(cmp.rows.empty());
  for (const auto& r : cmp.rows) CHECK(r.error == r.rate - r.oracle);

  std::vector<double> rev(betas.rbegin(), betas.rend());
  std::swap(rev[2], rev[9]);
  const RDCurve c2 = rd_curve(bernoulli(0.3), hamming(2), rev, 1e-10, 100000);
  CHECK(compare_curve(c2, oracle, 0.01, 0.29).max_abs_err == cmp.max_abs_err);

  CHECK_THROWS_AS(compare_curve(RDCurve{}, oracle, 0.01, 0.29), EmptyComparison);
  CHECK_THROWS_AS(compare_curve(c, oracle, 5.0, 6.0), EmptyComparison);
}

TEST_CASE("support_atoms") {
  const Vector labels = Vector::LinSpaced(11, 0.0, 1.0);
  const auto pm = support_atoms(ProbabilityVector::point_mass(11, 4).with_labels(labels), 1e-6, 0.25);
  REQUIRE(pm.size() == 1);
  CHECK(pm[0].width == 0.0);
  CHECK(pm[0].center == doctest::Approx(0.4));
  CHECK(pm[0].mass == 1.0);

  const auto all = support_atoms(ProbabilityVector::uniform(11).with_labels(labels), 1e-6, 0.25);
  REQUIRE(all.size() == 1);
  CHECK(all[0].width == doctest::Approx(1.0));
  CHECK(all[0].mass == doctest::Approx(1.0));

  Vector w = Vector::Zero(11);
  w[1] = 0.3, w[2] = 0.2, w[8] = 0.5;
  const auto two = support_atoms(ProbabilityVector(w, labels), 1e-6, 0.25);
  REQUIRE(two.size() == 2);
  CHECK(two[0].center == doctest::Approx(0.14));
  CHECK(two[1].mass == doctest::Approx(0.5));

  CHECK_THROWS_AS(support_atoms(ProbabilityVector::uniform(3), 1e-6, 0.1), InvalidInput);
}

TEST_CASE("slb gap and the support dichotomy") {
  const SourceSpec g = discretize_gaussian(1.0, 6.0, 129);
  const DistortionMatrix gse = squared_error(g.grid, g.grid);
  BlahutOptions opt;
  const RDPoint gp = solve_for_distortion(g.weights, gse, 0.25, opt);
  const SupportReport gr = support_report(gp, g, gse);
  CHECK(std::abs(gr.slb_gap) <= 5e-3);
  CHECK(gr.covered_mass >= 0.999);

  const SourceSpec u = discretize_uniform(-1.0, 1.0, 201);
  const DistortionMatrix use = squared_error(u.grid, u.grid);
  const double dm = d_max(u.weights, use).value;
  const RDPoint up = solve_for_distortion(u.weights, use, 0.5 * dm, opt);
  const SupportReport ur = support_report(up, u, use);
  CHECK(ur.slb_gap > 0.01);
  CHECK(ur.clusters.size() >= 2);
  CHECK(ur.covered_mass >= 0.999);
  CHECK(ur.min_cluster_gap >= 3.0 * u.cell_widths[0]);

  // near d_max the clamped bound leaves the rate itself
  RDPoint top = up;
  top.distortion = dm;
  top.rate = 1e-4;
  CHECK(slb_gap(top, u, use) == doctest::Approx(1e-4));

  CHECK_THROWS_AS(slb_gap(gp, g, hamming(129)), InvalidInput);
}

// The Gaussian optimum on a grid is a comb of atoms about one kernel width
// apart (Kν is what the objective sees, and it is nearly flat in ν), so the
// 3-cell cluster proxy does not see a single cluster here.
TEST_CASE("gaussian optimum reads as one cluster" * doctest::should_fail()) {
  const SourceSpec g = discretize_gaussian(1.0, 6.0, 129);
  const DistortionMatrix gse = squared_error(g.grid, g.grid);
  const RDPoint gp = solve_for_distortion(g.weights, gse, 0.25, BlahutOptions{});
  CHECK(support_report(gp, g, gse).clusters.size() == 1);
}
