#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rdbridge/blahut.hpp"
#include "rdbridge/parallel.hpp"
#include "rdbridge/schrodinger.hpp"
#include "rdbridge/verify.hpp"

namespace py = pybind11;
using namespace rdbridge;

namespace {

ProbabilityVector to_pv(const Vector& w, std::optional<Vector> labels = std::nullopt) {
  return ProbabilityVector(w, std::move(labels));
}

ProbabilityVector start_nu(const std::optional<Vector>& nu0, Index n) {
  return nu0 ? to_pv(*nu0) : ProbabilityVector::uniform(n);
}

py::dict point_dict(const RDPoint& p) {
  py::dict d;
  d["beta"] = p.beta;
  d["distortion"] = p.distortion;
  d["rate"] = p.rate;
  d["nu_star"] = p.nu_star.weights();
  d["iterations"] = p.iterations;
  d["fixpoint_residual"] = p.fixpoint_residual;
  d["certificate_slack"] = p.certificate_slack;
  d["converged"] = p.converged;
  return d;
}

}  // namespace

PYBIND11_MODULE(_rdbridge, m) {
  m.doc() = "Rate-distortion by Blahut-Arimoto, Schrodinger potentials and optimality checks";

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<ConvergenceFailure>(m, "ConvergenceFailure", PyExc_RuntimeError);
  py::register_exception<StaleCertificate>(m, "StaleCertificate", PyExc_RuntimeError);
  py::register_exception<EmptyComparison>(m, "EmptyComparison", PyExc_ValueError);

  m.def("kl_divergence", [](const Vector& p, const Vector& q) {
    return kl_divergence(to_pv(p), to_pv(q));
  });
  m.def("entropy", [](const Vector& p) { return entropy(to_pv(p)); });
  m.def("mutual_information", [](const Matrix& joint) { return mutual_information(Coupling(joint)); });

  m.def("hamming", [](Index n) { return hamming(n).values(); });
  m.def("squared_error", [](const Vector& x, const Vector& y) { return squared_error(x, y).values(); });
  m.def("d_max", [](const Vector& mu, const Matrix& rho) {
    const DMax d = d_max(to_pv(mu), DistortionMatrix(rho));
    return py::make_tuple(d.value, d.argmin);
  });
  m.def("d_floor", [](const Vector& mu, const Matrix& rho) {
    return d_floor(to_pv(mu), DistortionMatrix(rho));
  });
  m.def("discretize_gaussian", [](double sigma, double width, Index points) {
    const SourceSpec s = discretize_gaussian(sigma, width, points);
    return py::make_tuple(s.grid, s.weights.weights(), s.differential_entropy());
  }, py::arg("sigma") = 1.0, py::arg("width") = 6.0, py::arg("points") = 257);

  m.def("ba_fixed_point",
        [](const Vector& mu, const Matrix& rho, double beta, std::optional<Vector> nu0, double tol,
           long max_iter, bool polish) {
          BlahutOptions opt;
          opt.tol = tol;
          opt.max_iter = max_iter;
          opt.polish = polish;
          return point_dict(ba_fixed_point(to_pv(mu), DistortionMatrix(rho), beta,
                                           start_nu(nu0, rho.cols()), opt));
        },
        py::arg("mu"), py::arg("rho"), py::arg("beta"), py::arg("nu0") = py::none(),
        py::arg("tol") = 1e-10, py::arg("max_iter") = 100000, py::arg("polish") = true);

  m.def("rd_curve",
        [](const Vector& mu, const Matrix& rho, std::vector<double> betas, double tol, long max_iter) {
          const RDCurve c = rd_curve(to_pv(mu), DistortionMatrix(rho), std::move(betas), tol, max_iter);
          py::list points;
          for (std::size_t k = 0; k < c.points.size(); ++k) {
            py::dict d = point_dict(c.points[k]);
            d["degraded"] = static_cast<bool>(c.degraded[k]);
            points.append(d);
          }
          return points;
        },
        py::arg("mu"), py::arg("rho"), py::arg("betas"), py::arg("tol") = 1e-10,
        py::arg("max_iter") = 100000);

  m.def("solve_for_distortion",
        [](const Vector& mu, const Matrix& rho, double target, double tol) {
          BlahutOptions opt;
          opt.tol = tol;
          return point_dict(solve_for_distortion(to_pv(mu), DistortionMatrix(rho), target, opt));
        },
        py::arg("mu"), py::arg("rho"), py::arg("target"), py::arg("tol") = 1e-10);

  m.def("dual_certificate",
        [](const Vector& mu, const Matrix& rho, double beta, const Vector& nu,
           std::optional<double> distortion) {
          const DualCertificate c =
              dual_certificate(to_pv(mu), DistortionMatrix(rho), beta, to_pv(nu), distortion);
          py::dict d;
          d["alpha"] = c.alpha;
          d["column_load"] = c.column_load;
          d["slack"] = c.slack;
          d["dual_value"] = c.dual_value;
          return d;
        },
        py::arg("mu"), py::arg("rho"), py::arg("beta"), py::arg("nu"),
        py::arg("distortion") = py::none());

  m.def("sinkhorn",
        [](const Vector& mu, const Vector& nu, const Matrix& rho, double beta, double tol,
           long max_iter, std::optional<double> distortion) {
          const ProbabilityVector m_ = to_pv(mu), n_ = to_pv(nu);
          const DistortionMatrix r(rho);
          const SchrodingerSolution s = sinkhorn(m_, n_, r, beta, tol, max_iter);
          const SchrodingerResidual res = schrodinger_residual(m_, n_, r, s.scaling);
          py::dict d;
          d["log_f"] = s.scaling.log_f;
          d["log_g"] = s.scaling.log_g;
          d["log_k"] = s.scaling.log_k;
          d["iterations"] = s.scaling.iterations;
          d["coupling"] = s.coupling.joint();
          d["residuals"] = py::make_tuple(res.row, res.col, res.eq8);
          d["g_spread"] = s.scaling.g_spread(n_);
          d["L"] = eval_L(m_, n_, r, beta, s.scaling);
          if (distortion) d["J"] = eval_J(m_, n_, r, beta, *distortion, s.scaling);
          return d;
        },
        py::arg("mu"), py::arg("nu"), py::arg("rho"), py::arg("beta"), py::arg("tol") = 1e-12,
        py::arg("max_iter") = 200000, py::arg("distortion") = py::none());

  m.def("check_optimality", [](const Vector& mu, const Matrix& rho, double beta, const Vector& nu) {
    const OptimalityReport r = check_optimality(to_pv(mu), DistortionMatrix(rho), beta, to_pv(nu));
    py::dict d;
    d["beta"] = r.beta;
    d["distortion"] = r.distortion;
    d["rate"] = r.rate;
    d["g_spread"] = r.g_spread;
    d["L"] = r.l_value;
    d["J"] = r.j_value;
    d["dual_gap"] = r.dual_gap;
    d["certificate_slack"] = r.certificate_slack;
    d["verdict"] = to_string(r.verdict);
    d["diagnostics"] = r.diagnostics;
    return d;
  });

  m.def("oracle_bernoulli_hamming", &oracle_bernoulli_hamming, py::arg("p"), py::arg("distortion"));
  m.def("oracle_gaussian_mse", &oracle_gaussian_mse, py::arg("sigma"), py::arg("distortion"));
  m.def("set_threads", &set_thread_override, "Thread cap for this process; 0 restores RD_BRIDGE_THREADS.");
}
