#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rdbridge/distortion.hpp"
#include "rdbridge/measures.hpp"

namespace rdbridge {

/// Raw `key = value` pairs. Later sources override earlier ones.
using KeyValues = std::map<std::string, std::string>;

/// Parses the flat config format: one `key = value` per line, `#` starts a
/// comment, blank lines ignored. Throws InvalidInput on malformed lines.
KeyValues parse_key_values(const std::string& text);
KeyValues read_config_file(const std::string& path);

enum class Units { nats, bits };

/// Single conversion site for reported rates.
double to_units(double nats, Units units);

struct SourceConfig {
  std::string kind = "bernoulli";  // bernoulli | uniform | gaussian | custom
  double p = 0.5;
  double sigma = 1.0;
  double width = 6.0;  // gaussian half width in sigmas
  long points = 257;
  double lo = -1.0;  // uniform support
  double hi = 1.0;
  std::vector<double> weights;  // custom
  std::vector<double> labels;   // custom, optional
};

struct DistortionConfig {
  std::string kind = "hamming";  // hamming | mse | custom
  std::vector<std::vector<double>> matrix;
  std::vector<double> labels;  // reconstruction labels for custom, optional
};

struct BetaSchedule {
  std::vector<double> list;  // explicit list wins when non-empty
  double lo = 0.1;
  double hi = 20.0;
  long count = 20;

  std::vector<double> values() const;
};

struct RunConfig {
  SourceConfig source;
  DistortionConfig distortion;
  BetaSchedule betas;
  double tol = 1e-10;
  long max_iter = 100000;
  Units units = Units::nats;
  bool deterministic = true;
  bool polish = true;

  std::optional<double> target_beta;
  std::optional<double> target_distortion;
  std::string nu_file;
  std::string oracle;  // bernoulli | gaussian
  std::optional<double> compare_d_lo;
  std::optional<double> compare_d_hi;
  std::optional<double> compare_bound;
};

/// Typed, validated view of the key-value pairs. Unknown keys and invalid
/// values throw InvalidInput with a message naming the key.
RunConfig resolve_config(const KeyValues& kv);

/// Every key with its resolved value, for embedding in reports.
KeyValues describe_config(const RunConfig& cfg);

/// The keys resolve_config understands.
const std::vector<std::string>& config_keys();

struct Problem {
  ProbabilityVector mu;
  DistortionMatrix rho;
  Vector reconstruction_labels;
  std::optional<SourceSpec> source;  // present for grid-discretized sources
};

Problem build_problem(const RunConfig& cfg);

}  // namespace rdbridge
