#include "kinkflux/covlab.hpp"
#include "kinkflux/error.hpp"
#include "kinkflux/harness.hpp"
#include "kinkflux/kernels.hpp"
#include "kinkflux/limit.hpp"
#include "kinkflux/version.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>

namespace py = pybind11;
using namespace kinkflux;

namespace {

py::array_t<double> to_array(const Matrix& m) {
    py::array_t<double> a({m.rows, m.cols});
    std::copy(m.data.begin(), m.data.end(), a.mutable_data());
    return a;
}

GaussianPathBatch sample(const std::string& rep, const std::vector<double>& times, std::size_t paths,
                         std::uint64_t seed, std::size_t threads) {
    const TimeGrid g{times};
    SamplerOptions o;
    o.threads = threads;
    if (rep == "fbm_odd") return sample_fbm_odd(g, paths, seed, o);
    if (rep == "heat") return sample_heat_origin(g, paths, seed, {}, o);
    if (rep == "volterra") return sample_volterra(g, paths, seed, 1024, o);
    if (rep == "cholesky") return sample_cholesky_reference(g, paths, seed, o);
    if (rep == "h2") {
        H2LatticeOptions h;
        h.threads = threads;
        return sample_h2(g, paths, seed, CutoffFunction::identity(), h).batch;
    }
    throw ArgumentError("unknown representation '" + rep + "'");
}

}  // namespace

PYBIND11_MODULE(_kinkflux, m) {
    m.doc() = "Front-fluctuation lab for the stochastic Cahn-Hilliard equation";
    m.attr("__version__") = std::string(version);

    py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<GridError>(m, "GridError", PyExc_ValueError);

    m.def("phi", &phi_eval, py::arg("x"), py::arg("k") = 0);
    m.def("green_G", &green_G, py::arg("x"), py::arg("y"), py::arg("t"), py::arg("dx_order") = 0);
    m.def("kinf", &kinf_eval, py::arg("z"), py::arg("t"), py::arg("i") = 0, py::arg("j") = 0);
    m.def("kstar", &kstar_eval, py::arg("x"), py::arg("y"), py::arg("t"), py::arg("i") = 0, py::arg("j") = 0);

    m.def("cov_r", &cov_r, py::arg("t"), py::arg("s"));
    m.def("h2_covariance", &h2_covariance, py::arg("t"), py::arg("s"));
    m.def("y_variance_coefficient", &y_variance_coefficient);
    m.def(
        "cov_y", [](double x, double t, double xp, double tp, double rel_tol) {
            return cov_Y(CovQuery{x, t, xp, tp}, rel_tol);
        },
        py::arg("x"), py::arg("t"), py::arg("xp"), py::arg("tp"), py::arg("rel_tol") = 1e-5);

    m.def(
        "sample_limit",
        [](const std::string& rep, const std::vector<double>& times, std::size_t paths, std::uint64_t seed,
           std::size_t threads) {
            GaussianPathBatch b;
            {
                py::gil_scoped_release release;
                b = sample(rep, times, paths, seed, threads);
            }
            return to_array(b.positive_samples());
        },
        py::arg("representation"), py::arg("times"), py::arg("paths"), py::arg("seed") = 1, py::arg("threads") = 1,
        "Sample paths x len(times) array of the limit process (h2 carries its own prefactor).");

    m.def(
        "run_ensemble",
        [](double epsilon, std::size_t paths, std::uint64_t seed, std::size_t threads) {
            auto cfg = preset_config(Preset::reduced, epsilon);
            cfg.paths = paths;
            cfg.sim.seed = seed;
            cfg.threads = threads;
            cfg.finalize();
            EnsembleSummary s;
            {
                py::gil_scoped_release release;
                s = run_ensemble(cfg);
            }
            py::dict d;
            d["times"] = s.times;
            d["x"] = to_array(s.x);
            d["variance"] = s.variance;
            d["variance_se"] = s.variance_se;
            d["matched_variance"] = s.matched_variance;
            d["excluded"] = s.exclusions.size();
            return d;
        },
        py::arg("epsilon") = 1e-2, py::arg("paths") = 50, py::arg("seed") = 20240601, py::arg("threads") = 0,
        "Reduced-preset ensemble at the given epsilon.");
}
