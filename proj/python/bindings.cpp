#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>

#include "json.hpp"

#include "cyclordf/asymptotic.hpp"
#include "cyclordf/config.hpp"
#include "cyclordf/errors.hpp"
#include "cyclordf/suite.hpp"
#include "cyclordf/verify_appendix.hpp"
#include "cyclordf/waterfill.hpp"

namespace py = pybind11;
using namespace cyclordf;
using nlohmann::json;

namespace {

// Configs cross the boundary as JSON text; the Python wrapper serializes dicts.
ExperimentConfig config_from(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(e.what());
  }
  return parse_config(doc);
}

double require_d(const ExperimentConfig& cfg) {
  if (!cfg.distortion) throw ConfigError("D is required");
  return *cfg.distortion;
}

json point_json(const RdfPoint& p) {
  return {{"D", p.distortion},
          {"R", p.rate},
          {"theta", p.theta},
          {"avg_var", p.avg_var},
          {"active_fraction", p.active_fraction},
          {"constraint_inactive", p.constraint_inactive}};
}

json sweep_json(const std::string& label, const SweepResult& r) {
  json pts = json::array();
  for (const auto& p : r.points) {
    pts.push_back({{"axis_value", p.axis_value},
                   {"n", p.n},
                   {"p_n", p.p_n},
                   {"epsilon_n", p.eps_n},
                   {"phase_s", p.phase_s},
                   {"R", p.failed ? json(nullptr) : json(p.rdf.rate)},
                   {"theta", p.failed ? json(nullptr) : json(p.rdf.theta)},
                   {"error", p.error}});
  }
  json out = {{"label", label}, {"axis", to_string(r.axis)}, {"partial", r.partial},
              {"points", pts}};
  if (r.limsup_estimate) out["limsup"] = *r.limsup_estimate;
  if (r.shift_gap) out["shift_gap"] = *r.shift_gap;
  if (r.gate) out["gate"] = {{"gamma_c", r.gate->gamma_c}, {"verdict", r.gate->pass ? "PASS" : "FAIL"}};
  return out;
}

std::string rdf(const std::string& text, int jobs) {
  const auto cfg = config_from(text);
  json out = json::array();
  for (const auto& m : cfg.models) {
    const auto e = rdf_sync(*m.model, cfg.sampling, require_d(cfg), cfg.pipeline(jobs));
    auto j = point_json(e.point);
    j["label"] = m.label;
    j["p_n"] = e.plan.p_n;
    j["epsilon_n"] = e.plan.eps_eff;
    out.push_back(j);
  }
  return out.dump();
}

std::string sweep(const std::string& text, int jobs) {
  const auto cfg = config_from(text);
  if (!cfg.sweep) throw ConfigError("sweep section is required");
  const auto& sw = *cfg.sweep;
  const auto options = cfg.pipeline(jobs);
  json curves = json::array();
  for (const auto& m : cfg.models) {
    switch (sw.axis) {
      case SweepAxis::N:
        curves.push_back(sweep_json(m.label, n_sweep(*m.model, cfg.sampling, require_d(cfg),
                                                     sw.n_values, cfg.n_sweep_options(), options)));
        break;
      case SweepAxis::Phase:
        for (auto n : sw.n_values) {
          SamplingPlan plan = cfg.sampling;
          plan.n = n;
          curves.push_back(sweep_json(m.label + ", n=" + std::to_string(n),
                                      phase_sweep(*m.model, plan, require_d(cfg), sw.phi_tildes,
                                                  options)));
        }
        break;
      case SweepAxis::Distortion:
        if (!cfg.sampling.n) throw ConfigError("D sweep needs a fixed sampling.n");
        curves.push_back(sweep_json(
            m.label, distortion_sweep(*m.model, cfg.sampling, sw.distortions, options)));
        break;
    }
  }
  return curves.dump();
}

std::string gate(const std::string& text) {
  const auto cfg = config_from(text);
  json out = json::array();
  for (const auto& m : cfg.models) {
    const auto g = gate_check(*m.model, cfg.sampling.p, require_d(cfg), cfg.grid.gamma_t_grid,
                              cfg.grid.gamma_lag_grid);
    out.push_back({{"label", m.label},
                   {"gamma_c", g.gamma_c},
                   {"tau_c", g.tau_c},
                   {"verdict", g.pass ? "PASS" : "FAIL"},
                   {"result_label", g.label()}});
  }
  return out.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Rate-distortion of sampled cyclostationary Gaussian sources";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  auto numerical = py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<ResourceError>(m, "ResourceError", base.ptr());
  py::register_exception<PrecisionError>(m, "PrecisionError", numerical.ptr());

  m.def("_rdf", &rdf, py::arg("config_json"), py::arg("jobs") = 1,
        py::call_guard<py::gil_scoped_release>());
  m.def("_sweep", &sweep, py::arg("config_json"), py::arg("jobs") = 1,
        py::call_guard<py::gil_scoped_release>());
  m.def("_gate", &gate, py::arg("config_json"), py::call_guard<py::gil_scoped_release>());
  m.def(
      "_verify",
      [](const std::string& text, int jobs) {
        return run_verify_suite(config_from(text), jobs).to_json().dump();
      },
      py::arg("config_json"), py::arg("jobs") = 1, py::call_guard<py::gil_scoped_release>());
  m.def("_schema", [] { return config_schema().dump(); });

  m.def(
      "rational_approx",
      [](const std::string& epsilon, int p, std::int64_t n, double period) {
        const auto r = rational_approx(Epsilon::parse(epsilon), p, n, period);
        py::dict d;
        d["n"] = r.n;
        d["floor_n_eps"] = r.floor_n_eps;
        d["epsilon_n"] = r.eps_n;
        d["p_n"] = r.p_n;
        d["sample_interval"] = r.sample_interval;
        return d;
      },
      py::arg("epsilon"), py::arg("p"), py::arg("n"), py::arg("period") = 5e-6,
      "Rational approximation p_n = p n + floor(n eps) of the sampling ratio.");

  m.def(
      "finite_block_rdf",
      [](const Eigen::MatrixXd& cov, double distortion) {
        const auto b = finite_block_rdf(cov, distortion);
        return py::make_tuple(b.rate, b.theta, b.eigenvalues);
      },
      py::arg("cov"), py::arg("distortion"),
      "Reverse water-filling on a covariance matrix: (rate bits/sample, theta, eigenvalues).");

  m.def(
      "sdd_min_eig_bound",
      [](const Eigen::MatrixXd& a) {
        const auto r = sdd_min_eig_bound(a);
        py::dict d;
        d["sdd"] = r.sdd;
        d["min_eig"] = r.min_eig;
        d["gershgorin_bound"] = r.gershgorin_bound;
        d["bound_holds"] = r.bound_holds;
        return d;
      },
      py::arg("matrix"));

  m.def(
      "moment_bound_check",
      [](const Eigen::MatrixXd& c, double rho) {
        const auto r = moment_bound_check(c, rho);
        py::dict d;
        d["mean_d"] = r.mean_d;
        d["second_moment"] = r.second_moment;
        d["bound_3rho2"] = r.bound_3rho2;
        d["mean_within_rho"] = r.mean_within_rho;
        d["second_within_bound"] = r.second_within_bound;
        return d;
      },
      py::arg("cov"), py::arg("rho"));
}
