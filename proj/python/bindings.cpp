#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "myers/config.hpp"
#include "myers/errors.hpp"
#include "myers/report.hpp"
#include "myers/validation.hpp"

namespace py = pybind11;
using namespace myers;
using geometry::ManifoldModel;
using geometry::PointOnManifold;

namespace {

sde::SamplerConfig sampler(double dt, double t_max, int n_paths, std::uint64_t seed, int stride, int threads) {
    sde::SamplerConfig c;
    c.dt = dt;
    c.t_max = t_max;
    c.n_paths = n_paths;
    c.seed = seed;
    c.record_stride = stride;
    c.threads = threads;
    return c;
}

py::dict stats(const std::vector<sde::Stat>& s) {
    Eigen::VectorXd mean(static_cast<Eigen::Index>(s.size())), err(mean.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        mean[static_cast<Eigen::Index>(i)] = s[i].mean;
        err[static_cast<Eigen::Index>(i)] = s[i].std_error;
    }
    py::dict d;
    d["mean"] = mean;
    d["std_error"] = err;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Probabilistic Myers criterion on closed surfaces";

    static py::exception<Error> base(m, "MyersError");
    static py::exception<ConfigError> config_error(m, "ConfigError", base.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ConfigError& e) {
            config_error(e.what());
        } catch (const Error& e) {
            base(e.what());
        }
    });

    py::class_<PointOnManifold>(m, "Point")
        .def(py::init([](int chart, double u, double v) { return PointOnManifold{chart, geometry::Vec2(u, v)}; }),
             py::arg("chart"), py::arg("u"), py::arg("v"))
        .def_readonly("chart", &PointOnManifold::chart)
        .def_property_readonly("u", [](const PointOnManifold& p) { return p.coords[0]; })
        .def_property_readonly("v", [](const PointOnManifold& p) { return p.coords[1]; })
        .def("__repr__", [](const PointOnManifold& p) {
            return "Point(chart=" + std::to_string(p.chart) + ", u=" + report::format_number(p.coords[0]) +
                   ", v=" + report::format_number(p.coords[1]) + ")";
        });

    py::class_<ManifoldModel>(m, "Manifold")
        .def_static("sphere", &ManifoldModel::sphere, py::arg("radius") = 1.0)
        .def_static("flat_torus", &ManifoldModel::flat_torus, py::arg("period_u"), py::arg("period_v"))
        .def_static(
            "expression_metric",
            [](double pu, double pv, const std::string& g11, const std::string& g12, const std::string& g22) {
                return ManifoldModel::expression_metric(pu, pv, expr::parse(g11), expr::parse(g12), expr::parse(g22));
            },
            py::arg("period_u"), py::arg("period_v"), py::arg("g11"), py::arg("g12"), py::arg("g22"))
        .def_property_readonly("name", &ManifoldModel::name)
        .def("describe", &ManifoldModel::describe)
        .def("from_ambient", [](const ManifoldModel& mm, double x, double y, double z) {
            return mm.from_ambient(geometry::Vec3(x, y, z));
        })
        .def("ambient", [](const ManifoldModel& mm, const PointOnManifold& p) { return mm.ambient(p); })
        .def("metric", [](const ManifoldModel& mm, const PointOnManifold& p) { return mm.metric(p); })
        .def("rho_h", [](const ManifoldModel& mm, const std::string& h, const PointOnManifold& p) {
            return geometry::rho_h(mm, expr::parse(h), p);
        })
        .def("h_volume", [](const ManifoldModel& mm, const std::string& h, int resolution) {
            return geometry::h_volume(mm, expr::parse(h), resolution);
        }, py::arg("h"), py::arg("resolution") = 64);

    m.def("top_eigen", [](const ManifoldModel& mm, const std::string& h, int resolution, double rho_shift) {
        const auto op = spectral::build_operator(mm, expr::parse(h), resolution, rho_shift);
        const auto e = spectral::top_eigen(op);
        py::dict d;
        d["lambda0"] = e.lambda0;
        d["mu_top"] = e.mu_top;
        d["residual"] = e.residual;
        d["criterion_holds"] = e.criterion_holds();
        return d;
    }, py::arg("manifold"), py::arg("h") = "0", py::arg("resolution") = 64, py::arg("rho_shift") = 0.0);

    m.def("spectrum", [](const ManifoldModel& mm, const std::string& h, int resolution, int k, bool schrodinger) {
        const auto op = spectral::build_operator(mm, expr::parse(h), resolution);
        const auto s = spectral::top_eigenpairs(
            op, schrodinger ? spectral::Generator::schrodinger : spectral::Generator::heat, k);
        return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(s.values.data(), static_cast<Eigen::Index>(s.values.size())));
    }, py::arg("manifold"), py::arg("h") = "0", py::arg("resolution") = 64, py::arg("k") = 10,
       py::arg("schrodinger") = false, "Top eigenvalues of 1/2 Delta^h (or 1/2 (Delta^h - rho^h)), descending.");

    m.def("sample_ensemble", [](const ManifoldModel& mm, const std::string& h, const PointOnManifold& x0, double dt,
                                double t_max, int n_paths, std::uint64_t seed, int record_stride, int threads) {
        sde::EnsembleRecord rec;
        {
            py::gil_scoped_release release;
            rec = sde::sample_ensemble(mm, expr::parse(h), x0, {}, sampler(dt, t_max, n_paths, seed, record_stride, threads));
        }
        py::dict d;
        d["times"] = Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(rec.times.data(), static_cast<Eigen::Index>(rec.times.size())));
        d["fk_weight"] = stats(rec.fk_weight);
        d["w_norm"] = stats(rec.w_norm);
        d["w_minus_fk"] = stats(rec.w_minus_fk);
        d["fk_time_integral"] = stats(rec.fk_time_integral);
        d["n_paths"] = rec.n_paths;
        d["n_excluded"] = rec.n_excluded;
        return d;
    }, py::arg("manifold"), py::arg("h"), py::arg("x0"), py::arg("dt") = 1e-2, py::arg("t_max") = 1.0,
       py::arg("n_paths") = 1000, py::arg("seed") = 1, py::arg("record_stride") = 10, py::arg("threads") = 1);

    m.def("check_json", [](const ManifoldModel& mm, const std::string& h, double dt, double t_max, int n_paths,
                           std::uint64_t seed, int record_stride, int resolution, int threads) {
        criterion::NumericsConfig c;
        c.sampler = sampler(dt, t_max, n_paths, seed, record_stride, threads);
        c.resolution = resolution;
        const auto hx = expr::parse(h);
        py::gil_scoped_release release;
        return report::report_json(criterion::check(mm, hx, c));
    }, py::arg("manifold"), py::arg("h") = "0", py::arg("dt") = 1e-2, py::arg("t_max") = 10.0,
       py::arg("n_paths") = 2000, py::arg("seed") = 1, py::arg("record_stride") = 10, py::arg("resolution") = 64,
       py::arg("threads") = 1);

    m.def("check_config_json", [](const std::string& text, int threads) {
        config::RunConfig c = config::parse_config(text);
        c.numerics.sampler.threads = threads;
        py::gil_scoped_release release;
        return report::report_json(criterion::check(*c.manifold, c.h, c.numerics));
    }, py::arg("config_text"), py::arg("threads") = 1);

    m.def("validate", [](bool quick, int threads) {
        validation::Options opt;
        opt.quick = quick;
        opt.threads = threads;
        std::vector<validation::CriterionResult> out;
        {
            py::gil_scoped_release release;
            out = validation::run_acceptance(opt);
        }
        py::list l;
        for (const auto& r : out) l.append(py::make_tuple(r.id, r.title, r.passed, r.detail));
        return l;
    }, py::arg("quick") = true, py::arg("threads") = 1);
}
