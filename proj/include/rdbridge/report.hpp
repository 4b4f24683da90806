#pragma once

#include <string>

#include "rdbridge/blahut.hpp"
#include "rdbridge/config.hpp"
#include "rdbridge/schrodinger.hpp"
#include "rdbridge/verify.hpp"

namespace rdbridge {

/// %.17g, so every double survives a text round trip.
std::string format_double(double v);

/// `beta,distortion,rate,iterations,certificate_slack,converged`, one row per point.
std::string curve_csv(const RDCurve& curve, Units units);

/// `distortion,rate,rate_oracle,err` rows followed by `max_abs_err=<v>`.
std::string compare_csv(const CurveComparison& cmp, Units units);

// JSON reports. Each embeds the resolved config under "config". Rates are in
// the configured units; J, L and the potentials stay in nats.
std::string point_json(const RDPoint& point, const OptimalityReport& check, const RunConfig& cfg);
std::string check_json(const OptimalityReport& check, const RunConfig& cfg);

struct SinkhornOutput {
  ScalingPair scaling;
  SchrodingerResidual residuals;
  double distortion = 0.0;
  double j_value = 0.0;
  double l_value = 0.0;
};
std::string sinkhorn_json(const SinkhornOutput& out, const RunConfig& cfg);

/// Reads a reconstruction from JSON: either {"weights": [...], "labels": [...]}
/// or a point report carrying "nuStar". Throws InvalidInput on anything else.
ProbabilityVector parse_nu(const std::string& text);
ProbabilityVector read_nu_file(const std::string& path);

}  // namespace rdbridge
