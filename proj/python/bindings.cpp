#include "risnull/config.hpp"
#include "risnull/harness.hpp"
#include "risnull/manifold_optimizer.hpp"
#include "risnull/nulling_solver.hpp"
#include "risnull/parallel.hpp"
#include "risnull/thresholds.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

namespace py = pybind11;
using nlohmann::json;
using namespace risnull;

namespace {

RunConfig config_from(const std::string& text) {
  return parse_config(json::parse(text.empty() ? "{}" : text));
}

py::dict report_dict(const ThresholdReport& r) {
  py::dict d;
  d["L"] = r.L;
  d["eta"] = r.eta;
  d["n_necessary_gordon"] = r.n_necessary_gordon;
  d["n1"] = r.n1;
  d["n2"] = r.n2;
  d["n_sufficient"] = r.n_sufficient;
  d["n_necessary_evs"] = r.n_necessary_evs;
  d["n_necessary_evs_large_eta"] = r.n_necessary_evs_large_eta;
  d["n_necessary_evs_corrected"] = r.n_necessary_evs_corrected;
  d["n_refined"] = r.n_refined;
  d["eta_transition"] = r.eta_transition;
  d["evs_domain_error"] = r.evs_domain_error;
  return d;
}

py::dict outcome_dict(const SolveOutcome& o) {
  py::dict d;
  d["v"] = o.v.values();
  d["residual"] = o.residual;
  d["normalized_residual"] = o.normalized_residual;
  d["iterations"] = o.iterations;
  d["restarts_used"] = o.restarts_used;
  d["feasible"] = o.feasible;
  d["rank_deficient"] = o.rank_deficient;
  return d;
}

}  // namespace

PYBIND11_MODULE(_risnull, m) {
  m.doc() = "RIS interference nulling: thresholds, solvers and sweeps";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def("necessary_n_gordon", &necessary_n_gordon, py::arg("L"), py::arg("eta"));
  m.def("n1", &n1, py::arg("L"), py::arg("eta"));
  m.def("n2", &n2, py::arg("L"), py::arg("eta"));
  m.def("sufficient_n", &sufficient_n, py::arg("L"), py::arg("eta"));
  m.def("refined_threshold", &refined_threshold, py::arg("L"), py::arg("eta"), py::arg("c") = -0.5);
  m.def("transition_eta", &transition_eta, py::arg("L"), py::arg("c") = -0.5);
  m.def("round_half_up", &round_half_up);
  m.def("antenna_collab_feasible", &antenna_collab_feasible, py::arg("G"), py::arg("M"), py::arg("K"));
  m.def(
      "gordon_bounds_torus",
      [](Index L, Index N, double sigma) {
        const Interval i = gordon_bounds_torus(L, N, sigma);
        return py::make_tuple(i.lower, i.upper);
      },
      py::arg("L"), py::arg("N"), py::arg("sigma") = 1.0);
  m.def(
      "gordon_bounds_sphere",
      [](Index L, Index N, double sigma) {
        const Interval i = gordon_bounds_sphere(L, N, sigma);
        return py::make_tuple(i.lower, i.upper);
      },
      py::arg("L"), py::arg("N"), py::arg("sigma") = 1.0);

  m.def(
      "threshold_report",
      [](Index L, double eta, double c, double c1, double c2, std::optional<double> c_bar) {
        ThresholdConfig cfg;
        cfg.L = L;
        cfg.eta = eta;
        cfg.c = c;
        cfg.c1 = c1;
        cfg.c2 = c2;
        cfg.c_bar = c_bar;
        return report_dict(threshold_report(cfg));
      },
      py::arg("L"), py::arg("eta"), py::arg("c") = -0.5, py::arg("c1") = 2.0, py::arg("c2") = 2.0,
      py::arg("c_bar") = py::none());

  m.def("derive_trial_seed", &derive_trial_seed, py::arg("master"), py::arg("point"), py::arg("trial"));

  m.def(
      "project_torus", [](const CVector& v) { return project_torus(v).values(); }, py::arg("v"));

  m.def(
      "solve_system",
      [](const CMatrix& a, const CVector& b, double sigma3, double sigma4, std::uint64_t seed,
         int max_iters, double eps_feas, int restarts) {
        if (a.cols() != b.size()) throw std::invalid_argument("A must be N x L with len(b) = L");
        NullingSystem sys;
        sys.a = a;
        sys.b = b;
        sys.sigma3 = sigma3;
        sys.sigma4 = sigma4;
        sys.rows.resize(static_cast<std::size_t>(b.size()));
        for (std::size_t i = 0; i < sys.rows.size(); ++i) sys.rows[i].ordinal = static_cast<int>(i);
        SolverOptions opts;
        opts.max_iters = max_iters;
        opts.eps_feas = eps_feas;
        opts.restarts = restarts;
        Rng rng(seed);
        return outcome_dict(alternating_projection(sys, opts, rng));
      },
      py::arg("A"), py::arg("b"), py::arg("sigma3"), py::arg("sigma4"), py::arg("seed") = 0,
      py::arg("max_iters") = 2000, py::arg("eps_feas") = 1e-5, py::arg("restarts") = 3);

  m.def(
      "surrogate_system",
      [](Index L, Index N, double sigma3, double sigma4, std::uint64_t seed) {
        Rng rng(seed);
        const NullingSystem sys = surrogate_system(L, N, sigma3, sigma4, rng);
        return py::make_tuple(sys.a, sys.b);
      },
      py::arg("L"), py::arg("N"), py::arg("sigma3"), py::arg("sigma4") = 1.0, py::arg("seed") = 0);

  m.def(
      "solve_instance",
      [](const std::string& config) {
        const RunConfig cfg = config_from(config);
        SweepSpec spec = sweep_spec_from(cfg);
        spec.n_grid = {cfg.system.elements};
        const InstanceReport rep = solve_instance(spec);
        py::dict d = outcome_dict(rep.outcome);
        d["N"] = rep.n;
        d["L"] = rep.L;
        d["eta"] = rep.eta;
        d["min_desired_gain"] = rep.min_desired_gain;
        return d;
      },
      py::arg("config_json"));

  m.def(
      "feasibility_sweep",
      [](const std::string& config, int workers) {
        const RunConfig cfg = config_from(config);
        SweepResult res;
        {
          py::gil_scoped_release release;
          res = feasibility_sweep(sweep_spec_from(cfg), workers > 0 ? workers : default_worker_count());
        }
        return sweep_result_to_json(res).dump();
      },
      py::arg("config_json"), py::arg("workers") = 1);

  m.def(
      "quantile_boundary",
      [](const std::string& result_json, double p) {
        const QuantileBoundary q = quantile_boundary(sweep_result_from_json(json::parse(result_json)), p);
        py::list out;
        for (std::size_t i = 0; i < q.eta.size(); ++i) {
          out.append(py::make_tuple(q.eta[i], q.n[i] ? py::cast(*q.n[i]) : py::none()));
        }
        return out;
      },
      py::arg("result_json"), py::arg("p"));

  m.def(
      "rate_sweep",
      [](const std::string& config, int trials, int workers) {
        const RunConfig cfg = config_from(config);
        std::vector<RatePoint> pts;
        {
          py::gil_scoped_release release;
          pts = rate_sweep(rate_spec_from(cfg, trials), workers > 0 ? workers : default_worker_count());
        }
        return to_json(rate_table(pts)).dump();
      },
      py::arg("config_json"), py::arg("trials") = 20, py::arg("workers") = 1);

  m.def(
      "validate_theorem3",
      [](Index L, double sigma, int trials, std::uint64_t seed) {
        const NormValidation v = validate_theorem3(L, sigma, trials, seed);
        return py::make_tuple(v.empirical_mean, v.standard_error, v.reference, v.passed);
      },
      py::arg("L"), py::arg("sigma"), py::arg("trials"), py::arg("seed") = 0);
  m.def(
      "validate_theorem4",
      [](Index L, Index N, double rho, int trials, std::uint64_t seed) {
        const NormValidation v = validate_theorem4(L, N, rho, trials, seed);
        return py::make_tuple(v.empirical_mean, v.standard_error, v.reference, v.passed);
      },
      py::arg("L"), py::arg("N"), py::arg("rho"), py::arg("trials"), py::arg("seed") = 0);
}
