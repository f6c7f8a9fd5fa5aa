// Python module: thin wrappers over the core library. Results come back as
// the same JSON the command line writes.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wickbench/config.hpp"
#include "wickbench/experiments.hpp"
#include "wickbench/output.hpp"
#include "wickbench/polyseq.hpp"
#include "wickbench/sausage.hpp"
#include "wickbench/special.hpp"

namespace py = pybind11;

namespace {

py::object to_py(const wb::ExperimentResult& r) {
    auto json = py::module_::import("json");
    return json.attr("loads")(wb::results_json(r));
}

std::map<std::string, std::string> coeffs(const wb::BiPoly& p) {
    // "i,j" -> exact rational, coefficient of x^i u^j
    std::map<std::string, std::string> out;
    for (auto& [e, c] : p.terms()) out[std::to_string(e[0]) + "," + std::to_string(e[1])] = wb::to_string(c);
    return out;
}

}  // namespace

PYBIND11_MODULE(_wickbench, m) {
    py::register_exception<wb::ConfigError>(m, "ConfigError", PyExc_ValueError);

    m.def("experiment_names", &wb::experiment_names);
    m.def("identity_tags", &wb::identity_tags);
    m.def(
        "verify_identity",
        [](const std::string& tag, int n_max) {
            auto r = wb::verify_identity(tag, n_max);
            py::dict d;
            d["identity"] = r.identity;
            d["n_max"] = r.n_max;
            d["pass"] = r.pass;
            d["first_failure"] = r.first_failure ? py::object(py::str(*r.first_failure)) : py::object(py::none());
            return d;
        },
        py::arg("tag"), py::arg("n_max"));
    m.def("hermite_q", [](int n) { return coeffs(wb::hermite_q(n)); }, py::arg("n"));
    m.def("laguerre_lambda", [](int n) { return coeffs(wb::laguerre_lambda(n)); }, py::arg("n"));

    m.def("bessel_k", &wb::bessel_k, py::arg("nu"), py::arg("x"));
    m.def("bessel_potential", &wb::bessel_potential, py::arg("eta"), py::arg("r"));
    m.def("massive_green", &wb::massive_green, py::arg("M"), py::arg("r"));
    m.def("hitting_cdf", &wb::hitting_cdf, py::arg("v"), py::arg("t"));
    m.def("series_p_hit", &wb::series_p_hit, py::arg("v"), py::arg("t"), py::arg("terms"));
    m.def("mass_change_check", &wb::mass_change_check, py::arg("x"), py::arg("u1"), py::arg("u2"), py::arg("n"));

    m.def(
        "run_config",
        [](const std::string& text, int workers) {
            auto cfg = wb::Config::parse(text);
            wb::RunOptions opt;
            opt.workers = workers;
            wb::ExperimentResult r;
            {
                py::gil_scoped_release nogil;
                r = wb::run_experiment(cfg, opt);
            }
            return to_py(r);
        },
        py::arg("toml_text"), py::arg("workers") = 1, "Run an experiment from TOML text; returns the results.json content.");
    m.def(
        "selfcheck",
        [](int workers) {
            wb::RunOptions opt;
            opt.workers = workers;
            wb::ExperimentResult r;
            {
                py::gil_scoped_release nogil;
                r = wb::run_selfcheck({}, opt);
            }
            return to_py(r);
        },
        py::arg("workers") = 1);
}
