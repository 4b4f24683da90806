#include <cmath>
#include <numbers>

#include "doctest.h"
#include "rdbridge/distortion.hpp"
#include "rdbridge/errors.hpp"

using namespace rdbridge;

namespace {
Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(rows.size(), rows.begin()->size());
  Index i = 0;
  for (auto r : rows) {
    Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}
Vector vec(std::initializer_list<double> v) {
  Vector out(v.size());
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}
}  // namespace

TEST_CASE("hamming") {
  CHECK(hamming(1).values() == mat({{0}}));
  CHECK(hamming(2).values() == mat({{0, 1}, {1, 0}}));
  const DistortionMatrix h3 = hamming(3);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j) CHECK(h3(i, j) == (i == j ? 0.0 : 1.0));
  CHECK(h3.normalized());
}

TEST_CASE("squared error") {
  CHECK(squared_error(vec({0, 1}), vec({0, 1})).values() == mat({{0, 1}, {1, 0}}));
  CHECK(squared_error(vec({0}), vec({3})).values() == mat({{9}}));
  const DistortionMatrix s = squared_error(vec({-1, 1}), vec({0}));
  CHECK(s.values() == mat({{1}, {1}}));
  CHECK_FALSE(s.normalized());
  CHECK(squared_error(vec({0, 1}), vec({0, 0.5, 1})).normalized());
}

TEST_CASE("normalize_loss") {
  const NormalizedLoss h = normalize_loss(hamming(3));
  CHECK(h.rho.values() == hamming(3).values());
  CHECK(h.offsets.isZero());

  const NormalizedLoss n = normalize_loss(DistortionMatrix(mat({{2, 3}, {5, 4}})));
  CHECK(n.rho.values() == mat({{0, 1}, {1, 0}}));
  CHECK(n.offsets == vec({2, 4}));
  CHECK(normalize_loss(n.rho).rho.values() == n.rho.values());

  CHECK(normalize_loss(DistortionMatrix(mat({{1, 1}}))).rho.values() == mat({{0, 0}}));
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(normalize_loss(DistortionMatrix(mat({{0, 1}, {inf, inf}}))), InvalidInput);
}

TEST_CASE("d_max and d_floor") {
  const DMax b = d_max(bernoulli(0.3), hamming(2));
  CHECK(b.value == doctest::Approx(0.3));
  CHECK(b.argmin == 0);
  CHECK(d_max(ProbabilityVector::point_mass(3, 0), hamming(3)).value == 0.0);
  CHECK(d_max(ProbabilityVector::uniform(4), hamming(4)).value == doctest::Approx(0.75));
  CHECK(d_max(ProbabilityVector::uniform(4), hamming(4)).argmin == 0);

  CHECK(d_floor(bernoulli(0.3), hamming(2)) == 0.0);
  CHECK(d_floor(ProbabilityVector::uniform(2), DistortionMatrix(mat({{2, 3}, {5, 4}}))) ==
        doctest::Approx(3.0));
  CHECK(d_floor(ProbabilityVector(std::vector<double>{1.0, 0.0}),
                DistortionMatrix(mat({{1, 7}, {0, 0}}))) == doctest::Approx(1.0));
}

TEST_CASE("d_max is invariant under column permutation") {
  const ProbabilityVector mu(std::vector<double>{0.1, 0.2, 0.3, 0.4});
  const DistortionMatrix rho(mat({{0, 2, 1, 3}, {1, 0, 2, 2}, {3, 1, 0, 1}, {2, 2, 1, 0}}));
  const std::vector<Index> perm = {2, 0, 3, 1};
  const DMax a = d_max(mu, rho);
  const DMax b = d_max(mu, rho.permute_columns(perm));
  CHECK(a.value == b.value);
  CHECK(perm[b.argmin] == a.argmin);
}

TEST_CASE("slb_mse") {
  const double h = 0.5 * std::log(2 * std::numbers::pi * std::numbers::e);
  CHECK(std::abs(slb_mse(h, 1.0)) <= 1e-15);
  CHECK(slb_mse(h, 0.25) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(std::abs(slb_mse(0.0, 1.0 / (2 * std::numbers::pi * std::numbers::e))) <= 1e-15);
  CHECK_THROWS_AS(slb_mse(0.0, 0.0), InvalidInput);
}

TEST_CASE("gaussian discretization") {
  const SourceSpec g = discretize_gaussian(1.0, 6.0, 257);
  CHECK(std::abs(g.weights.weights().sum() - 1.0) <= 1e-12);
  CHECK(g.differential_entropy() ==
        doctest::Approx(0.5 * std::log(2 * std::numbers::pi * std::numbers::e)).epsilon(2e-3));
  CHECK(std::abs(g.mean()) <= 1e-12);
  CHECK(std::abs(g.second_moment() - 1.0) <= 1e-3);
  CHECK(g.grid[128] == 0.0);

  double offset = 0.0;
  for (Index i = 0; i < g.grid.size(); ++i) offset += g.weights[i] * std::log(g.cell_widths[i]);
  CHECK(std::abs(offset - g.diff_entropy_offset) <= 1e-12);

  CHECK_THROWS_AS(discretize_gaussian(1.0, 6.0, 256), InvalidInput);
  CHECK_THROWS_AS(discretize_gaussian(1.0, 3.0, 257), InvalidInput);
  CHECK_THROWS_AS(discretize_gaussian(-1.0, 6.0, 257), InvalidInput);
}

TEST_CASE("uniform discretization") {
  const SourceSpec u = discretize_uniform(-1.0, 1.0, 401);
  CHECK(u.grid[0] == -1.0);
  CHECK(u.grid[400] == 1.0);
  CHECK(std::abs(u.weights.weights().sum() - 1.0) <= 1e-12);
  // h(U[-1,1]) = ln 2 up to the end cells
  CHECK(u.differential_entropy() == doctest::Approx(std::log(2.0)).epsilon(1e-2));
}
