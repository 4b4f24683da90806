#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "json.hpp"
#include "rdbridge/config.hpp"
#include "rdbridge/report.hpp"

using namespace rdbridge;
using nlohmann::json;

TEST_CASE("key-value parsing") {
  const KeyValues kv = parse_key_values(
      "# fixture\nsource.kind = bernoulli\n\n  source.p=0.3   # inline\nunits = bits\n");
  CHECK(kv.at("source.kind") == "bernoulli");
  CHECK(kv.at("source.p") == "0.3");
  CHECK(kv.size() == 3);
  CHECK_THROWS_AS(parse_key_values("source.kind bernoulli\n"), InvalidInput);
}

TEST_CASE("config validation") {
  CHECK_NOTHROW(resolve_config({}));
  try {
    resolve_config({{"tol", "0.5"}});
    FAIL("tol 0.5 accepted");
  } catch (const InvalidInput& e) {
    CHECK(std::string(e.what()).find("tol out of range") != std::string::npos);
  }
  CHECK_THROWS_AS(resolve_config({{"tol", "0"}}), InvalidInput);
  CHECK_THROWS_AS(resolve_config({{"betas.lo", "0"}, {"betas.hi", "1"}, {"betas.count", "5"}}),
                  InvalidInput);
  CHECK_THROWS_AS(resolve_config({{"betas.lo", "2"}, {"betas.hi", "1"}}), InvalidInput);
  CHECK_THROWS_AS(resolve_config({{"betas.count", "1"}}), InvalidInput);
  CHECK_THROWS_AS(resolve_config({{"no.such.key", "1"}}), InvalidInput);
  CHECK_THROWS_AS(resolve_config({{"source.p", "abc"}}), InvalidInput);
  CHECK_THROWS_AS(resolve_config({{"units", "hartleys"}}), InvalidInput);
  CHECK_THROWS_AS(resolve_config({{"target.beta", "1"}, {"target.distortion", "0.1"}}),
                  InvalidInput);

  const RunConfig c = resolve_config({{"betas.list", "3, 1,2"}, {"units", "bits"}});
  CHECK(c.betas.values() == std::vector<double>{3, 1, 2});
  CHECK(c.units == Units::bits);
}

TEST_CASE("geometric schedule") {
  BetaSchedule s;
  s.lo = 0.1, s.hi = 20.0, s.count = 30;
  const auto v = s.values();
  REQUIRE(v.size() == 30);
  CHECK(v.front() == 0.1);
  CHECK(v.back() == 20.0);
  for (std::size_t k = 1; k < v.size(); ++k)
    CHECK(v[k] / v[k - 1] == doctest::Approx(std::pow(200.0, 1.0 / 29.0)));
}

TEST_CASE("units are a single division by ln 2") {
  CHECK(to_units(1.0, Units::nats) == 1.0);
  CHECK(to_units(std::numbers::ln2, Units::bits) == 1.0);
  CHECK(to_units(0.3, Units::bits) == 0.3 / std::numbers::ln2);
}

TEST_CASE("build_problem") {
  const Problem b = build_problem(resolve_config({{"source.p", "0.3"}}));
  CHECK(b.mu[0] == doctest::Approx(0.7));
  CHECK(b.rho.values() == hamming(2).values());

  const Problem g = build_problem(resolve_config(
      {{"source.kind", "gaussian"}, {"source.points", "65"}, {"distortion.kind", "mse"}}));
  CHECK(g.mu.size() == 65);
  CHECK(g.source.has_value());
  CHECK(g.rho.kind() == LossKind::squared_error);

  const Problem c = build_problem(resolve_config({{"source.kind", "custom"},
                                                  {"source.weights", "0.25,0.75"},
                                                  {"distortion.kind", "custom"},
                                                  {"distortion.matrix", "0,1,2;2,1,inf"}}));
  CHECK(c.rho.cols() == 3);
  CHECK(std::isinf(c.rho(1, 2)));

  CHECK_THROWS_AS(build_problem(resolve_config({{"source.p", "1.5"}})), InvalidInput);
  CHECK_THROWS_AS(build_problem(resolve_config({{"source.kind", "custom"},
                                                {"source.weights", "0.5,0.6"}})),
                  InvalidInput);
  CHECK_THROWS_AS(build_problem(resolve_config({{"source.kind", "custom"},
                                                {"source.weights", "0.5,0.5"},
                                                {"distortion.kind", "custom"},
                                                {"distortion.matrix", "0,1"}})),
                  InvalidInput);
}

TEST_CASE("csv output") {
  const RDCurve c = rd_curve(bernoulli(0.3), hamming(2), {1.0, 2.0}, 1e-10, 10000);
  const std::string csv = curve_csv(c, Units::nats);
  CHECK(csv.rfind("beta,distortion,rate,iterations,certificate_slack,converged\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(csv.find("true") != std::string::npos);
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);

  const std::string bits = curve_csv(c, Units::bits);
  CHECK(bits != csv);
  CHECK(bits.find(format_double(c.points[1].rate / std::numbers::ln2)) != std::string::npos);
}

TEST_CASE("json reports round-trip nu") {
  const RunConfig cfg = resolve_config({{"source.p", "0.3"}});
  const Problem pr = build_problem(cfg);
  RDPoint p = ba_fixed_point(pr.mu, pr.rho, 2.0, ProbabilityVector::uniform(2), 1e-10, 10000);
  p.nu_star = p.nu_star.with_labels(pr.reconstruction_labels);
  const OptimalityReport rep = check_optimality(pr.mu, pr.rho, 2.0, p.nu_star);
  const std::string text = point_json(p, rep, cfg);
  const json j = json::parse(text);
  CHECK(j.at("beta") == 2.0);
  CHECK(j.at("config").at("source.p") == "0.29999999999999999");
  CHECK(j.at("optimality").at("verdict") == "optimal");

  const ProbabilityVector back = parse_nu(text);
  CHECK(back.weights() == p.nu_star.weights());
  CHECK(parse_nu(R"({"weights": [0.5, 0.5]})").size() == 2);
  CHECK_THROWS_AS(parse_nu("not json"), InvalidInput);
  CHECK_THROWS_AS(parse_nu(R"({"weights": [0.5, 0.6]})"), InvalidInput);
  CHECK_THROWS_AS(parse_nu(R"({"mass": 1})"), InvalidInput);
}
