// Command-line front end. Exit codes: 0 success, 1 invalid input or config,
// 2 a solver ran out of iterations, 3 a check ran but came out negative
// (suboptimal verdict, or a comparison outside its bound).

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rdbridge/blahut.hpp"
#include "rdbridge/config.hpp"
#include "rdbridge/errors.hpp"
#include "rdbridge/report.hpp"
#include "rdbridge/schrodinger.hpp"
#include "rdbridge/verify.hpp"

using namespace rdbridge;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kNotConverged = 2;
constexpr int kNegative = 3;

struct Output {
  std::string path;
  void write(const std::string& text) const {
    if (path.empty() || path == "-") {
      std::cout << text;
      return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write '" + path + "'");
    out << text;
  }
};

BlahutOptions solver_options(const RunConfig& cfg) {
  BlahutOptions o;
  o.tol = cfg.tol;
  o.max_iter = cfg.max_iter;
  o.polish = cfg.polish;
  return o;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// The reconstruction for check/sinkhorn, plus the beta to use: the explicit
// target wins, otherwise a point report's own beta.
struct NuInput {
  ProbabilityVector nu;
  double beta = 0.0;
};

NuInput load_nu(const RunConfig& cfg, const Problem& pb) {
  if (cfg.nu_file.empty()) throw InvalidInput("this command needs --nu <file>");
  const std::string text = read_text(cfg.nu_file);
  NuInput in{parse_nu(text), 0.0};
  if (in.nu.size() != pb.rho.cols())
    throw InvalidInput("reconstruction has " + std::to_string(in.nu.size()) +
                       " atoms, the loss has " + std::to_string(pb.rho.cols()) + " columns");
  if (in.nu.has_labels()) {
    const Vector& got = *in.nu.labels();
    for (Index j = 0; j < got.size(); ++j)
      if (std::abs(got[j] - pb.reconstruction_labels[j]) > 1e-9 * (1.0 + std::abs(got[j])))
        throw InvalidInput("reconstruction labels do not match the configured alphabet");
  } else {
    in.nu = in.nu.with_labels(pb.reconstruction_labels);
  }
  if (cfg.target_beta) {
    in.beta = *cfg.target_beta;
  } else {
    const auto j = nlohmann::json::parse(text);
    if (!j.contains("beta") || !j["beta"].is_number())
      throw InvalidInput("no beta: pass --beta or use a point report as the reconstruction file");
    in.beta = j["beta"].get<double>();
  }
  if (!(in.beta >= 0.0)) throw InvalidInput("beta must be >= 0");
  return in;
}

int cmd_curve(const RunConfig& cfg, const Output& out) {
  const Problem pb = build_problem(cfg);
  CurveOptions opt;
  opt.solver = solver_options(cfg);
  const RDCurve curve = rd_curve(pb.mu, pb.rho, cfg.betas.values(), opt);
  out.write(curve_csv(curve, cfg.units));
  const CurveShape shape = curve.shape();
  if (!shape.monotone || !shape.convex)
    std::cerr << "warning: curve shape check failed (monotone violation "
              << shape.max_monotone_violation << ", convexity violation "
              << shape.max_convexity_violation << ")\n";
  if (!curve.all_converged()) {
    std::cerr << "some points did not converge within max_iter\n";
    return kNotConverged;
  }
  return kOk;
}

int cmd_point(const RunConfig& cfg, const Output& out) {
  const Problem pb = build_problem(cfg);
  const BlahutOptions opt = solver_options(cfg);
  const DMax top = d_max(pb.mu, pb.rho);
  RDPoint pt;
  int code = kOk;
  try {
    if (cfg.target_beta) {
      const double beta = *cfg.target_beta;
      const ProbabilityVector nu0 = beta == 0.0
                                        ? ProbabilityVector::point_mass(pb.rho.cols(), top.argmin)
                                        : ProbabilityVector::uniform(pb.rho.cols());
      pt = ba_fixed_point(pb.mu, pb.rho, beta, nu0, opt);
    } else if (cfg.target_distortion) {
      const double target = *cfg.target_distortion;
      const double floor = d_floor(pb.mu, pb.rho);
      if (!(target > floor && target < top.value))
        throw InvalidInput("target distortion " + format_double(target) + " is outside (" +
                           format_double(floor) + ", " + format_double(top.value) +
                           "): R(D)=0 for D>D_max, and R is infinite below the floor");
      pt = solve_for_distortion(pb.mu, pb.rho, target, opt);
    } else {
      throw InvalidInput("point needs --beta or --distortion");
    }
  } catch (const BlahutConvergenceError& e) {
    std::cerr << e.what() << "\n";
    pt = e.partial();
    code = kNotConverged;
  }
  pt.nu_star = pt.nu_star.with_labels(pb.reconstruction_labels);
  const OptimalityReport rep = check_optimality(pb.mu, pb.rho, pt.beta, pt.nu_star);
  out.write(point_json(pt, rep, cfg));
  return code;
}

int cmd_check(const RunConfig& cfg, const Output& out) {
  const Problem pb = build_problem(cfg);
  const NuInput in = load_nu(cfg, pb);
  const OptimalityReport rep = check_optimality(pb.mu, pb.rho, in.beta, in.nu);
  out.write(check_json(rep, cfg));
  if (!rep.diagnostics.empty()) std::cerr << rep.diagnostics << "\n";
  switch (rep.verdict) {
    case Verdict::optimal:
      return kOk;
    case Verdict::suboptimal:
      return kNegative;
    case Verdict::inconclusive:
      break;
  }
  return kNotConverged;
}

int cmd_sinkhorn(const RunConfig& cfg, const Output& out) {
  const Problem pb = build_problem(cfg);
  const NuInput in = load_nu(cfg, pb);
  SchrodingerSolution sol;
  int code = kOk;
  try {
    sol = sinkhorn(pb.mu, in.nu, pb.rho, in.beta, cfg.tol, cfg.max_iter);
  } catch (const SinkhornConvergenceError& e) {
    std::cerr << e.what() << "\n";
    sol = e.partial();
    code = kNotConverged;
  }
  SinkhornOutput res;
  res.scaling = sol.scaling;
  res.residuals = schrodinger_residual(pb.mu, in.nu, pb.rho, sol.scaling);
  const Matrix& joint = sol.coupling.joint();
  for (Index i = 0; i < joint.rows(); ++i)
    for (Index j = 0; j < joint.cols(); ++j)
      if (joint(i, j) > 0.0) res.distortion += joint(i, j) * pb.rho(i, j);
  if (code == kOk) {
    res.j_value = eval_J(pb.mu, in.nu, pb.rho, in.beta, res.distortion, sol.scaling);
    res.l_value = eval_L(pb.mu, in.nu, pb.rho, in.beta, sol.scaling);
  } else {
    res.j_value = res.l_value = std::nan("");
  }
  out.write(sinkhorn_json(res, cfg));
  return code;
}

int cmd_compare(const RunConfig& cfg, const Output& out) {
  const Problem pb = build_problem(cfg);
  std::function<double(double)> oracle;
  double d_lo = 0.0, d_hi = 0.0, bound = 0.0;
  if (cfg.oracle == "bernoulli") {
    if (cfg.source.kind != "bernoulli" || cfg.distortion.kind != "hamming")
      throw InvalidInput("the bernoulli oracle needs source.kind=bernoulli and distortion.kind=hamming");
    const double p = cfg.source.p;
    oracle = [p](double d) { return oracle_bernoulli_hamming(p, d); };
    d_lo = 0.01;
    d_hi = std::min(p, 1.0 - p) - 0.01;
    bound = 1e-6;
  } else if (cfg.oracle == "gaussian") {
    if (cfg.source.kind != "gaussian" || cfg.distortion.kind != "mse")
      throw InvalidInput("the gaussian oracle needs source.kind=gaussian and distortion.kind=mse");
    const double sigma = cfg.source.sigma;
    oracle = [sigma](double d) { return oracle_gaussian_mse(sigma, d); };
    d_lo = 0.05 * sigma * sigma;
    d_hi = 0.5 * sigma * sigma;
    bound = 5e-3;
  } else {
    throw InvalidInput("compare needs --oracle bernoulli or --oracle gaussian");
  }
  d_lo = cfg.compare_d_lo.value_or(d_lo);
  d_hi = cfg.compare_d_hi.value_or(d_hi);
  bound = cfg.compare_bound.value_or(bound);

  CurveOptions opt;
  opt.solver = solver_options(cfg);
  const RDCurve curve = rd_curve(pb.mu, pb.rho, cfg.betas.values(), opt);
  const CurveComparison cmp = compare_curve(curve, oracle, d_lo, d_hi);
  out.write(compare_csv(cmp, cfg.units));
  for (const auto& r : cmp.rows)
    if (!r.converged) {
      std::cerr << "a compared point did not converge\n";
      return kNotConverged;
    }
  if (!(to_units(cmp.max_abs_err, cfg.units) <= bound)) {
    std::cerr << "max_abs_err " << format_double(to_units(cmp.max_abs_err, cfg.units))
              << " exceeds the bound " << format_double(bound) << "\n";
    return kNegative;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rate-distortion curves, Schrodinger potentials and optimality checks"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  Output out;
  app.add_option("--config", config_path, "key = value config file");
  app.add_option("--out", out.path, "write the result here instead of stdout");

  std::map<std::string, std::string> flags;
  std::map<std::string, CLI::Option*> opts;
  for (const auto& key : config_keys())
    opts[key] = app.add_option("--" + key, flags[key], "config key " + key);
  const std::map<std::string, std::string> aliases = {
      {"beta", "target.beta"}, {"distortion", "target.distortion"}, {"nu", "nu_file"}};
  std::map<std::string, std::string> alias_values;
  std::map<std::string, CLI::Option*> alias_opts;
  for (const auto& [name, key] : aliases)
    alias_opts[name] = app.add_option("--" + name, alias_values[name], "same as --" + key);

  app.add_subcommand("curve", "R(D) over the beta schedule, as CSV");
  app.add_subcommand("point", "one point at --beta or --distortion, as JSON");
  app.add_subcommand("check", "optimality report for the reconstruction in --nu");
  app.add_subcommand("sinkhorn", "Schrodinger potentials and J, L for --nu");
  app.add_subcommand("compare", "curve against a closed form given by --oracle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    KeyValues kv;
    if (!config_path.empty()) kv = read_config_file(config_path);
    for (const auto& [key, opt] : opts)
      if (opt->count() > 0) kv[key] = flags[key];
    for (const auto& [name, opt] : alias_opts)
      if (opt->count() > 0) kv[aliases.at(name)] = alias_values[name];
    const RunConfig cfg = resolve_config(kv);

    const std::string sub = app.get_subcommands().front()->get_name();
    if (sub == "curve") return cmd_curve(cfg, out);
    if (sub == "point") return cmd_point(cfg, out);
    if (sub == "check") return cmd_check(cfg, out);
    if (sub == "sinkhorn") return cmd_sinkhorn(cfg, out);
    return cmd_compare(cfg, out);
  } catch (const ConvergenceFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNotConverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  }
}
