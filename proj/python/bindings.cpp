#include "nlheat/acceptance.hpp"
#include "nlheat/heatkernel.hpp"
#include "nlheat/io.hpp"
#include "nlheat/ldp.hpp"
#include "nlheat/mcsim.hpp"
#include "nlheat/parallel.hpp"
#include "nlheat/regimes.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>

namespace py = pybind11;
using namespace nlheat;

namespace {

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), Eigen::Index(v.size())); }

py::array_t<double> to_array(const std::vector<double>& v) {
    py::array_t<double> a(py::ssize_t(v.size()));
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
}

// JSON crosses the boundary as text; the Python side parses it.
KernelFamily kernel_from(const std::string& descriptor) {
    if (descriptor == "gaussian") return KernelFamily::gaussian(1);
    if (descriptor == "gaussian2") return KernelFamily::gaussian(2);
    if (descriptor == "laplace") return KernelFamily::laplace(1.0);
    if (descriptor == "tent") return KernelFamily::compact_support(1, 1.0, Profile::Tent);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(descriptor);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("kernel descriptor is not JSON: ") + e.what());
    }
    return KernelFamily::from_json(j);
}

py::dict heat_kernel(const std::string& kernel, double t, std::size_t n, double L, const std::string& route,
                     double eps) {
    auto fam = kernel_from(kernel);
    auto lat = Lattice::make(fam.dimension(), n, L);
    HeatKernelResult res;
    {
        py::gil_scoped_release nogil;
        if (route == "series")
            res = v_series(fam, lat, t, eps);
        else if (route == "spectral")
            res = v_spectral(fam, lat, t);
        else
            throw ConfigError("route must be 'series' or 'spectral'");
    }
    std::vector<double> axis(lat.n);
    for (std::size_t j = 0; j < lat.n; ++j) axis[j] = lat.coord(j);
    py::dict d;
    d["x"] = to_array(axis);
    auto lv = to_array(res.log_v.values);
    if (lat.d == 2) lv = lv.reshape({py::ssize_t(lat.n), py::ssize_t(lat.n)});
    d["log_v"] = lv;
    d["rel_error"] = to_array(res.rel_error);
    d["mass"] = res.mass();
    d["log_atom_weight"] = res.log_atom_weight;
    d["k_max"] = res.k_max;
    d["unresolved"] = res.unresolved;
    d["error_estimate"] = res.error_estimate;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "compiled core of nlheat";
    m.attr("__version__") = NLHEAT_VERSION;

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<NumericError>(m, "NumericError", base.ptr());
    py::register_exception<ResourceError>(m, "ResourceError", base.ptr());

    m.def("set_max_workers", &set_max_workers, py::arg("n"));

    m.def("kernel_json", [](const std::string& k) { return kernel_from(k).to_json().dump(); }, py::arg("kernel"));
    m.def("kernel_density", [](const std::string& k, const std::vector<double>& x) {
        return kernel_from(k).evaluate(to_vec(x));
    }, py::arg("kernel"), py::arg("x"));
    m.def("kernel_fourier", [](const std::string& k, const std::vector<double>& p) {
        return kernel_from(k).fourier(to_vec(p));
    }, py::arg("kernel"), py::arg("p"));

    m.def("heat_kernel", &heat_kernel, py::arg("kernel"), py::arg("t"), py::arg("n") = 4096, py::arg("L") = 64.0,
          py::arg("route") = "series", py::arg("eps") = 1e-12);
    m.def("gaussian_log_v", [](double r, double t, int d) { return gaussian_log_v(r, t, d); }, py::arg("r"),
          py::arg("t"), py::arg("d") = 1);

    m.def("rate", [](const std::string& k, const std::vector<double>& r) {
        auto res = RateFunction(kernel_from(k)).evaluate(to_vec(r));
        return py::make_tuple(res.value, std::vector<double>(res.gradient.data(), res.gradient.data() + res.gradient.size()));
    }, py::arg("kernel"), py::arg("r"), "I(r) and grad I(r)");
    m.def("phi", [](const std::string& k, const std::vector<double>& r) {
        auto res = PhiExponent(kernel_from(k)).evaluate(to_vec(r));
        return py::make_tuple(res.xi, res.phi);
    }, py::arg("kernel"), py::arg("r"), "(xi_r, Phi(r))");
    m.def("phi_gaussian", [](double r) {
        auto g = phi_gaussian(r);
        return py::make_tuple(g.xi_hat, g.phi);
    }, py::arg("r"));

    m.def("classify", [](double xn, double t, double band) { return to_string(classify(xn, t, band)); },
          py::arg("x"), py::arg("t"), py::arg("band") = 2.0);
    m.def("predict_log_v", [](const std::string& k, const std::vector<double>& x, double t, double band) {
        auto p = predict_log_v(kernel_from(k), to_vec(x), t, band);
        return py::make_tuple(p.log_v, to_string(p.kind), p.bound_only);
    }, py::arg("kernel"), py::arg("x"), py::arg("t"), py::arg("band") = 2.0);

    m.def("simulate", [](const std::string& config) {
        auto cfg = SimConfig::from_json(nlohmann::json::parse(config));
        EstimateReport rep;
        {
            py::gil_scoped_release nogil;
            rep = cfg.tilt ? tilted_tail(cfg) : sample_paths(cfg);
        }
        return rep.to_json().dump();
    }, py::arg("config"));

    m.def("validate", [](const std::string& suite, std::uint64_t seed, long paths) {
        SuiteConfig cfg;
        cfg.seed = seed;
        cfg.mc_paths = paths;
        SuiteReport rep;
        {
            py::gil_scoped_release nogil;
            rep = run_suite(suite, cfg);
        }
        return rep.to_json().dump();
    }, py::arg("suite") = "all", py::arg("seed") = 20261015, py::arg("paths") = 100000);
}
