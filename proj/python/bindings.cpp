#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "heavyq/circuits.hpp"
#include "heavyq/config.hpp"
#include "heavyq/runner.hpp"

namespace py = pybind11;
using namespace hq;

namespace {

BackgroundCharges to_charges(const std::vector<std::pair<int, double>>& q) {
  BackgroundCharges b;
  for (const auto& [site, Q] : q) b.add(site, Q);
  return b;
}

py::array_t<double> to_numpy(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Lattice Schwinger model with heavy background charges";
  m.def("version", &version);

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  m.def("group_velocity", &group_velocity, py::arg("m"), py::arg("K"));
  m.def("max_group_velocity", &max_group_velocity, py::arg("m"));
  m.def(
      "free_dispersion",
      [](int L, double mass) {
        py::list out;
        for (const auto& p : free_dispersion(LatticeConfig{L, mass, 0.0}))
          out.append(py::dict(py::arg("nbar") = p.nbar, py::arg("K") = p.K, py::arg("E") = p.E, py::arg("v") = p.v));
        return out;
      },
      py::arg("L"), py::arg("m"));

  py::class_<TrajectoryParams>(m, "Trajectory")
      .def(py::init([](double v_max, double a_max, double x0, double xf, double a0) {
             TrajectoryParams t{v_max, a_max, x0, xf, a0};
             t.validate();
             return t;
           }),
           py::arg("v_max"), py::arg("a_max"), py::arg("x0"), py::arg("xf"), py::arg("a0") = 1e-4)
      .def_readonly("v_max", &TrajectoryParams::v_max)
      .def_readonly("a_max", &TrajectoryParams::a_max)
      .def_readonly("x0", &TrajectoryParams::x0)
      .def_readonly("xf", &TrajectoryParams::xf)
      .def_readonly("a0", &TrajectoryParams::a0)
      .def_property_readonly("t0", &TrajectoryParams::t0)
      .def_property_readonly("T", &TrajectoryParams::T)
      .def_property_readonly("duration", &TrajectoryParams::duration)
      .def("__call__", [](const TrajectoryParams& t, double time) {
        const auto k = eval_trajectory(t, time);
        return py::make_tuple(k.x, k.v, k.a);
      });

  m.def(
      "hamiltonian_terms",
      [](int L, double mass, double g, const std::vector<std::pair<int, double>>& charges) {
        const LatticeConfig c{L, mass, g};
        c.validate();
        std::vector<std::pair<double, std::string>> out;
        for (const auto& t : build_hamiltonian(c, to_charges(charges)).terms()) out.emplace_back(t.coef, t.p.label());
        return out;
      },
      py::arg("L"), py::arg("m"), py::arg("g"), py::arg("charges") = std::vector<std::pair<int, double>>{});

  m.def(
      "ground_state",
      [](int L, double mass, double g, const std::vector<std::pair<int, double>>& charges) {
        const LatticeConfig c{L, mass, g};
        c.validate();
        const auto q = to_charges(charges);
        q.validate(c.N());
        const int sector = screening_sector(q);
        GroundState gs;
        {
          py::gil_scoped_release release;
          gs = ground_state(build_hamiltonian(c, q), L, sector);
        }
        const auto psi = to_complex(gs.psi);
        return py::dict(py::arg("E") = gs.E, py::arg("sector") = sector, py::arg("residual") = gs.residual,
                        py::arg("density") = to_numpy(charge_density(psi)),
                        py::arg("chiral_condensate") = chiral_condensate(psi));
      },
      py::arg("L"), py::arg("m"), py::arg("g"), py::arg("charges") = std::vector<std::pair<int, double>>{});

  m.def(
      "evolve",
      [](const std::string& config_json) {
        const auto cfg = parse_config(config_json);
        EvolutionRun run;
        {
          py::gil_scoped_release release;
          run = run_config(cfg);
        }
        std::vector<double> t, x, v, E;
        for (const auto& r : run.result.series.records) {
          t.push_back(r.t);
          x.push_back(r.x);
          v.push_back(r.v);
          E.push_back(r.E);
        }
        return py::dict(py::arg("E0") = run.E0, py::arg("sector") = run.sector, py::arg("t") = to_numpy(t),
                        py::arg("x") = to_numpy(x), py::arg("v") = to_numpy(v), py::arg("E") = to_numpy(E),
                        py::arg("dE_dx") = to_numpy(run.result.series.size() >= 3 ? de_dx(run.result.series)
                                                                                    : std::vector<double>{}));
      },
      py::arg("config_json"), "Evolve the moving charge of a JSON run configuration.");

  m.def(
      "canonical_config", [](const std::string& text) { return canonical_config(parse_config(text)); },
      py::arg("config_json"));
  m.def(
      "config_hash", [](const std::string& text) { return config_hash(parse_config(text)); }, py::arg("config_json"));

  m.def(
      "state_prep_formula",
      [](int L, int n_charges) {
        const auto r = state_prep_formula(L, n_charges);
        return py::make_tuple(r.formula_count, r.formula_depth);
      },
      py::arg("L"), py::arg("n_charges"));
  m.def(
      "cnot_cost_trotter_step", [](int L, int lb) { return cnot_cost_trotter_step(L, lb).formula_count; },
      py::arg("L"), py::arg("lambda_bar"));
  m.def("qasm_cnot_count", &qasm_cnot_count, py::arg("qasm"));
}
