#include "rdbridge/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "rdbridge/errors.hpp"

namespace rdbridge {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || t.empty())
    throw InvalidInput(key + ": '" + text + "' is not a number");
  return v;
}

long parse_long(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw InvalidInput(key + ": '" + text + "' is not an integer");
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw InvalidInput(key + ": '" + text + "' is not a boolean");
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
  return out;
}

std::vector<std::vector<double>> parse_matrix(const std::string& key, const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream ss(text);
  std::string row;
  while (std::getline(ss, row, ';'))
    if (!trim(row).empty()) rows.push_back(parse_list(key, row));
  return rows;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? "," : "") + fmt(v[k]);
  return out;
}

Vector index_labels(Index n) { return Vector::LinSpaced(n, 0.0, static_cast<double>(n - 1)); }

}  // namespace

KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidInput("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw InvalidInput("config line " + std::to_string(lineno) + ": empty key");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValues read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_key_values(buf.str());
}

double to_units(double nats, Units units) {
  return units == Units::bits ? nats / std::numbers::ln2 : nats;
}

std::vector<double> BetaSchedule::values() const {
  if (!list.empty()) return list;
  std::vector<double> out(static_cast<std::size_t>(count));
  const double ratio = std::log(hi / lo) / static_cast<double>(count - 1);
  for (long k = 0; k < count; ++k)
    out[static_cast<std::size_t>(k)] = lo * std::exp(ratio * static_cast<double>(k));
  out.back() = hi;
  return out;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "source.kind",   "source.p",        "source.sigma",     "source.width",
      "source.points", "source.lo",       "source.hi",        "source.weights",
      "source.labels", "distortion.kind", "distortion.matrix", "distortion.labels",
      "betas.lo",      "betas.hi",        "betas.count",      "betas.list",
      "tol",           "max_iter",        "units",            "deterministic",
      "polish",        "target.beta",     "target.distortion", "nu_file",
      "oracle",        "compare.d_lo",    "compare.d_hi",     "compare.bound"};
  return keys;
}

RunConfig resolve_config(const KeyValues& kv) {
  RunConfig c;
  for (const auto& [key, value] : kv) {
    if (key == "source.kind") c.source.kind = value;
    else if (key == "source.p") c.source.p = parse_double(key, value);
    else if (key == "source.sigma") c.source.sigma = parse_double(key, value);
    else if (key == "source.width") c.source.width = parse_double(key, value);
    else if (key == "source.points") c.source.points = parse_long(key, value);
    else if (key == "source.lo") c.source.lo = parse_double(key, value);
    else if (key == "source.hi") c.source.hi = parse_double(key, value);
    else if (key == "source.weights") c.source.weights = parse_list(key, value);
    else if (key == "source.labels") c.source.labels = parse_list(key, value);
    else if (key == "distortion.kind") c.distortion.kind = value;
    else if (key == "distortion.matrix") c.distortion.matrix = parse_matrix(key, value);
    else if (key == "distortion.labels") c.distortion.labels = parse_list(key, value);
    else if (key == "betas.lo") c.betas.lo = parse_double(key, value);
    else if (key == "betas.hi") c.betas.hi = parse_double(key, value);
    else if (key == "betas.count") c.betas.count = parse_long(key, value);
    else if (key == "betas.list") c.betas.list = parse_list(key, value);
    else if (key == "tol") c.tol = parse_double(key, value);
    else if (key == "max_iter") c.max_iter = parse_long(key, value);
    else if (key == "units") {
      if (value == "nats") c.units = Units::nats;
      else if (value == "bits") c.units = Units::bits;
      else throw InvalidInput("units must be nats or bits");
    }
    else if (key == "deterministic") c.deterministic = parse_bool(key, value);
    else if (key == "polish") c.polish = parse_bool(key, value);
    else if (key == "target.beta") c.target_beta = parse_double(key, value);
    else if (key == "target.distortion") c.target_distortion = parse_double(key, value);
    else if (key == "nu_file") c.nu_file = value;
    else if (key == "oracle") c.oracle = value;
    else if (key == "compare.d_lo") c.compare_d_lo = parse_double(key, value);
    else if (key == "compare.d_hi") c.compare_d_hi = parse_double(key, value);
    else if (key == "compare.bound") c.compare_bound = parse_double(key, value);
    else throw InvalidInput("unknown config key '" + key + "'");
  }

  if (!(c.tol > 0.0 && c.tol <= 1e-2)) throw InvalidInput("tol out of range: need 0 < tol <= 1e-2");
  if (c.max_iter < 1) throw InvalidInput("max_iter must be >= 1");
  if (c.betas.list.empty()) {
    if (!(c.betas.lo > 0.0)) throw InvalidInput("betas.lo must be > 0 for a geometric schedule");
    if (!(c.betas.hi > c.betas.lo)) throw InvalidInput("betas.hi must exceed betas.lo");
    if (c.betas.count < 2) throw InvalidInput("betas.count must be >= 2");
  } else {
    for (double b : c.betas.list)
      if (!(b > 0.0) || !std::isfinite(b)) throw InvalidInput("betas.list entries must be > 0");
  }
  const auto& k = c.source.kind;
  if (k != "bernoulli" && k != "uniform" && k != "gaussian" && k != "custom")
    throw InvalidInput("source.kind must be bernoulli, uniform, gaussian or custom");
  const auto& d = c.distortion.kind;
  if (d != "hamming" && d != "mse" && d != "custom")
    throw InvalidInput("distortion.kind must be hamming, mse or custom");
  if (c.target_beta && c.target_distortion)
    throw InvalidInput("give either target.beta or target.distortion, not both");
  if (c.target_beta && !(*c.target_beta >= 0.0)) throw InvalidInput("target.beta must be >= 0");
  return c;
}

KeyValues describe_config(const RunConfig& c) {
  KeyValues kv;
  kv["source.kind"] = c.source.kind;
  if (c.source.kind == "bernoulli") kv["source.p"] = fmt(c.source.p);
  if (c.source.kind == "gaussian") {
    kv["source.sigma"] = fmt(c.source.sigma);
    kv["source.width"] = fmt(c.source.width);
  }
  if (c.source.kind == "uniform") {
    kv["source.lo"] = fmt(c.source.lo);
    kv["source.hi"] = fmt(c.source.hi);
  }
  if (c.source.kind == "uniform" || c.source.kind == "gaussian")
    kv["source.points"] = std::to_string(c.source.points);
  if (c.source.kind == "custom") {
    kv["source.weights"] = fmt_list(c.source.weights);
    if (!c.source.labels.empty()) kv["source.labels"] = fmt_list(c.source.labels);
  }
  kv["distortion.kind"] = c.distortion.kind;
  if (c.distortion.kind == "custom") {
    std::string m;
    for (std::size_t r = 0; r < c.distortion.matrix.size(); ++r)
      m += (r ? ";" : "") + fmt_list(c.distortion.matrix[r]);
    kv["distortion.matrix"] = m;
    if (!c.distortion.labels.empty()) kv["distortion.labels"] = fmt_list(c.distortion.labels);
  }
  if (c.betas.list.empty()) {
    kv["betas.lo"] = fmt(c.betas.lo);
    kv["betas.hi"] = fmt(c.betas.hi);
    kv["betas.count"] = std::to_string(c.betas.count);
  } else {
    kv["betas.list"] = fmt_list(c.betas.list);
  }
  kv["tol"] = fmt(c.tol);
  kv["max_iter"] = std::to_string(c.max_iter);
  kv["units"] = c.units == Units::bits ? "bits" : "nats";
  kv["deterministic"] = c.deterministic ? "true" : "false";
  kv["polish"] = c.polish ? "true" : "false";
  if (c.target_beta) kv["target.beta"] = fmt(*c.target_beta);
  if (c.target_distortion) kv["target.distortion"] = fmt(*c.target_distortion);
  if (!c.nu_file.empty()) kv["nu_file"] = c.nu_file;
  if (!c.oracle.empty()) kv["oracle"] = c.oracle;
  if (c.compare_d_lo) kv["compare.d_lo"] = fmt(*c.compare_d_lo);
  if (c.compare_d_hi) kv["compare.d_hi"] = fmt(*c.compare_d_hi);
  if (c.compare_bound) kv["compare.bound"] = fmt(*c.compare_bound);
  return kv;
}

Problem build_problem(const RunConfig& cfg) {
  const auto& s = cfg.source;
  std::optional<SourceSpec> grid_source;
  ProbabilityVector mu;
  if (s.kind == "bernoulli") {
    if (!(s.p > 0.0 && s.p < 1.0)) throw InvalidInput("source.p must lie in (0, 1)");
    mu = bernoulli(s.p);
  } else if (s.kind == "uniform") {
    grid_source = discretize_uniform(s.lo, s.hi, s.points);
    mu = grid_source->weights;
  } else if (s.kind == "gaussian") {
    grid_source = discretize_gaussian(s.sigma, s.width, s.points);
    mu = grid_source->weights;
  } else {
    if (s.weights.empty()) throw InvalidInput("custom source needs source.weights");
    Vector w = Eigen::Map<const Vector>(s.weights.data(), static_cast<Index>(s.weights.size()));
    Vector labels = s.labels.empty()
                        ? index_labels(w.size())
                        : Vector(Eigen::Map<const Vector>(s.labels.data(),
                                                          static_cast<Index>(s.labels.size())));
    mu = ProbabilityVector(std::move(w), std::move(labels));
  }
  const Vector& x = *mu.labels();

  Problem pb{mu, DistortionMatrix(), x, grid_source};
  const auto& d = cfg.distortion;
  if (d.kind == "hamming") {
    pb.rho = hamming(mu.size());
  } else if (d.kind == "mse") {
    pb.rho = squared_error(x, x);
  } else {
    if (d.matrix.empty()) throw InvalidInput("custom distortion needs distortion.matrix");
    const auto cols = d.matrix.front().size();
    Matrix m(static_cast<Index>(d.matrix.size()), static_cast<Index>(cols));
    for (std::size_t r = 0; r < d.matrix.size(); ++r) {
      if (d.matrix[r].size() != cols) throw InvalidInput("distortion.matrix rows differ in length");
      for (std::size_t c = 0; c < cols; ++c)
        m(static_cast<Index>(r), static_cast<Index>(c)) = d.matrix[r][c];
    }
    pb.rho = DistortionMatrix(std::move(m));
    if (pb.rho.rows() != mu.size())
      throw InvalidInput("distortion.matrix has " + std::to_string(pb.rho.rows()) +
                         " rows but the source has " + std::to_string(mu.size()) + " atoms");
    pb.reconstruction_labels =
        d.labels.empty() ? index_labels(pb.rho.cols())
                         : Vector(Eigen::Map<const Vector>(d.labels.data(),
                                                           static_cast<Index>(d.labels.size())));
    if (pb.reconstruction_labels.size() != pb.rho.cols())
      throw InvalidInput("distortion.labels length does not match the matrix columns");
  }
  return pb;
}

}  // namespace rdbridge
