#include "rdbridge/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rdbridge/errors.hpp"

namespace rdbridge {

using nlohmann::ordered_json;

namespace {

ordered_json to_json(const Vector& v) {
  ordered_json a = ordered_json::array();
  for (Index k = 0; k < v.size(); ++k) a.push_back(v[k]);
  return a;
}

ordered_json config_json(const RunConfig& cfg) {
  ordered_json c = ordered_json::object();
  for (const auto& [k, v] : describe_config(cfg)) c[k] = v;
  return c;
}

const char* units_name(Units u) { return u == Units::bits ? "bits" : "nats"; }

void put_check(ordered_json& j, const OptimalityReport& r, Units u) {
  j["beta"] = r.beta;
  j["distortion"] = r.distortion;
  j["rate"] = to_units(r.rate, u);
  j["gSpread"] = r.g_spread;
  j["L"] = r.l_value;
  j["J"] = r.j_value;
  j["dualGap"] = r.dual_gap;
  j["certificateSlack"] = r.certificate_slack;
  j["sinkhornIterations"] = r.sinkhorn_iterations;
  j["verdict"] = to_string(r.verdict);
  j["diagnostics"] = r.diagnostics;
}

std::string finish(const ordered_json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string curve_csv(const RDCurve& curve, Units units) {
  std::string out = "beta,distortion,rate,iterations,certificate_slack,converged\n";
  for (std::size_t k = 0; k < curve.points.size(); ++k) {
    const RDPoint& p = curve.points[k];
    const bool ok = k >= curve.degraded.size() || !curve.degraded[k];
    out += format_double(p.beta) + "," + format_double(p.distortion) + "," +
           format_double(to_units(p.rate, units)) + "," + std::to_string(p.iterations) + "," +
           format_double(p.certificate_slack) + "," + (ok ? "true" : "false") + "\n";
  }
  return out;
}

std::string compare_csv(const CurveComparison& cmp, Units units) {
  std::string out = "distortion,rate,rate_oracle,err\n";
  for (const auto& r : cmp.rows)
    out += format_double(r.distortion) + "," + format_double(to_units(r.rate, units)) + "," +
           format_double(to_units(r.oracle, units)) + "," + format_double(to_units(r.error, units)) +
           "\n";
  out += "max_abs_err=" + format_double(to_units(cmp.max_abs_err, units)) + "\n";
  return out;
}

std::string point_json(const RDPoint& point, const OptimalityReport& check, const RunConfig& cfg) {
  ordered_json j;
  j["units"] = units_name(cfg.units);
  j["beta"] = point.beta;
  j["distortion"] = point.distortion;
  j["rate"] = to_units(point.rate, cfg.units);
  j["iterations"] = point.iterations;
  j["converged"] = point.converged;
  j["certificateSlack"] = point.certificate_slack;
  ordered_json nu;
  nu["weights"] = to_json(point.nu_star.weights());
  if (point.nu_star.has_labels()) nu["labels"] = to_json(*point.nu_star.labels());
  j["nuStar"] = nu;
  ordered_json opt;
  put_check(opt, check, cfg.units);
  j["optimality"] = opt;
  j["config"] = config_json(cfg);
  return finish(j);
}

std::string check_json(const OptimalityReport& check, const RunConfig& cfg) {
  ordered_json j;
  j["units"] = units_name(cfg.units);
  put_check(j, check, cfg.units);
  j["config"] = config_json(cfg);
  return finish(j);
}

std::string sinkhorn_json(const SinkhornOutput& out, const RunConfig& cfg) {
  ordered_json j;
  j["beta"] = out.scaling.beta;
  j["logF"] = to_json(out.scaling.log_f);
  j["logG"] = to_json(out.scaling.log_g);
  j["logK"] = out.scaling.log_k;
  j["iterations"] = out.scaling.iterations;
  j["residuals"] = {{"row", out.residuals.row},
                    {"col", out.residuals.col},
                    {"eq8", out.residuals.eq8}};
  j["distortion"] = out.distortion;
  j["J"] = out.j_value;
  j["L"] = out.l_value;
  j["config"] = config_json(cfg);
  return finish(j);
}

ProbabilityVector parse_nu(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("reconstruction file is not valid JSON: ") + e.what());
  }
  if (j.is_object() && j.contains("nuStar")) j = j["nuStar"];
  if (!j.is_object() || !j.contains("weights") || !j["weights"].is_array())
    throw InvalidInput("reconstruction file needs a \"weights\" array");
  auto read = [](const ordered_json& a, const char* what) {
    std::vector<double> v;
    for (const auto& x : a) {
      if (!x.is_number()) throw InvalidInput(std::string(what) + " must be numbers");
      v.push_back(x.get<double>());
    }
    return v;
  };
  std::vector<double> w = read(j["weights"], "weights");
  std::optional<std::vector<double>> labels;
  if (j.contains("labels")) {
    if (!j["labels"].is_array()) throw InvalidInput("labels must be an array");
    labels = read(j["labels"], "labels");
  }
  return ProbabilityVector(std::move(w), std::move(labels));
}

ProbabilityVector read_nu_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open reconstruction file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_nu(buf.str());
}

}  // namespace rdbridge
