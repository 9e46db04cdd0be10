// Python bindings for the core operations.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "divlab/blowup.hpp"
#include "divlab/calculus.hpp"
#include "divlab/errors.hpp"
#include "divlab/fields.hpp"
#include "divlab/rigidity.hpp"
#include "divlab/scenarios.hpp"
#include "divlab/trace.hpp"

namespace py = pybind11;
using namespace divlab;

namespace {

Vec to_vec(const std::vector<double>& v)
{
    if (v.size() > static_cast<std::size_t>(kMaxDim)) throw py::value_error("vector too long");
    Vec out(static_cast<int>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<int>(i)] = v[i];
    return out;
}

std::vector<double> from_vec(const Vec& v) { return {v.begin(), v.end()}; }

// Reports cross the boundary as plain dicts.
py::object to_py(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

std::vector<double> dyadic(int lo, int hi)
{
    std::vector<double> r;
    for (int k = lo; k <= hi; ++k) r.push_back(std::ldexp(1.0, -k));
    return r;
}

json probe_json(const TraceProbe& p) { return p.to_json(); }

}  // namespace

PYBIND11_MODULE(_divlab, m)
{
    m.doc() = "Divergence-measure field laboratory";

    // Translators are tried newest first, so the base class goes first.
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
    py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

    py::class_<VectorField>(m, "VectorField")
        .def_property_readonly("id", &VectorField::id)
        .def_property_readonly("dim", &VectorField::dim)
        .def_property_readonly("sup_bound", &VectorField::sup_bound)
        .def("__call__", [](const VectorField& f, const std::vector<double>& x) { return from_vec(f(to_vec(x))); })
        .def("in_domain", [](const VectorField& f, const std::vector<double>& x) { return f.in_domain(to_vec(x)); })
        .def("divergence", [](const VectorField& f, const std::vector<double>& x) { return f.divergence(to_vec(x)); })
        .def("__repr__", [](const VectorField& f) { return "<VectorField " + f.id() + ">"; });

    m.def("make_field", &make_field, py::arg("id"));
    m.def("field_registry", &field_registry);
    m.def("numeric_divergence",
          [](const VectorField& f, const std::vector<double>& x, double h) { return numeric_divergence(f, to_vec(x), h); },
          py::arg("field"), py::arg("x"), py::arg("h") = 1e-4);

    m.def("gamma_bounds", &gamma_bounds, py::arg("n"));
    m.def("auto_gamma", &auto_gamma, py::arg("n"));

    m.def(
        "certify",
        [](int n, double gamma, double c, int rho_points, int z_points) {
            return to_py(certify_potential(counterexample_potential(n, gamma), certification_grid(rho_points, z_points), c)
                             .to_json());
        },
        py::arg("n") = 4, py::arg("gamma") = auto_gamma(4), py::arg("c") = 1.0, py::arg("rho_points") = 200,
        py::arg("z_points") = 200);

    m.def(
        "flow_tube",
        [](const std::string& field, double epsilon, const std::vector<double>& lo, const std::vector<double>& hi,
           double h0, int seeds) {
            FlowTubeOptions opt;
            opt.seeds_per_axis = seeds;
            return to_py(build_flow_tube(make_field(field), epsilon, Plate{to_vec(lo), to_vec(hi)}, h0, opt).to_json());
        },
        py::arg("field"), py::arg("epsilon"), py::arg("lo"), py::arg("hi"), py::arg("h0"), py::arg("seeds") = 64);

    m.def(
        "strip_identity",
        [](const std::string& field, double r, double t) {
            return to_py(strip_identity_2d(make_field(field), r, t).to_json());
        },
        py::arg("field") = "stream:bump", py::arg("r") = 5.0, py::arg("t") = 3.0);

    m.def(
        "ball_average",
        [](const std::string& field, const std::vector<double>& x0, std::vector<double> radii) {
            const VectorField f = make_field(field);
            if (radii.empty()) radii = dyadic(3, 8);
            const Vec p = to_vec(x0);
            // A circle through x0 for the capillary field, the horizontal axis otherwise.
            const OrientedInterface S = field.rfind("capillary", 0) == 0
                                            ? OrientedInterface::circle(Vec{0.0, 0.0}, norm(p))
                                            : OrientedInterface::line(Vec{0.0, 0.0}, Vec{0.0, -1.0});
            return to_py(probe_json(weak_trace_ball_average(f, S, p, radii)));
        },
        py::arg("field"), py::arg("x0"), py::arg("radii") = std::vector<double>{});

    m.def(
        "separable",
        [](double gamma, double rho0, double psi0) { return to_py(separable_demo(gamma, rho0, psi0).to_json()); },
        py::arg("gamma") = 1.0, py::arg("rho0") = 1.0, py::arg("psi0") = 1.0);

    m.def("quadratic_margin", [](const std::vector<double>& xi) { return quadratic_margin(to_vec(xi)); },
          py::arg("xi"));

    m.def(
        "run_operation",
        [](const std::string& op, const Params& params) {
            ScenarioOutput out = run_operation(op, params);
            py::dict csv;
            for (const auto& [name, text] : out.csv) csv[py::str(name)] = text;
            return py::make_tuple(to_py(out.report.to_json()), csv);
        },
        py::arg("operation"), py::arg("params") = Params{});

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            const int code = run_cli(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));

    m.def("recipes", [] { return to_py(recipes_json()); });
}
