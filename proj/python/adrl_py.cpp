#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

#include "adrl/data.hpp"
#include "adrl/dataset_io.hpp"
#include "adrl/error.hpp"
#include "adrl/harness.hpp"
#include "adrl/imputation.hpp"
#include "adrl/metrics.hpp"

namespace py = pybind11;
using namespace adrl;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_numpy(const Matrix& m) {
    Array out({m.rows(), m.cols()});
    if (m.size() > 0) std::memcpy(out.mutable_data(), m.data().data(), m.size() * sizeof(double));
    return out;
}

Matrix from_numpy(const Array& a) {
    if (a.ndim() == 1) {
        return Matrix(static_cast<std::size_t>(a.shape(0)), 1,
                      std::vector<double>(a.data(), a.data() + a.size()));
    }
    if (a.ndim() != 2) throw ConfigError("expected a 1-D or 2-D array");
    return Matrix(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
                  std::vector<double>(a.data(), a.data() + a.size()));
}

TrainConfig make_config(const py::dict& overrides) {
    TrainConfig cfg;
    for (const auto& [k, v] : overrides) {
        std::string value;
        if (py::isinstance<py::bool_>(v)) value = v.cast<bool>() ? "true" : "false";
        else value = py::str(v).cast<std::string>();
        cfg.set(k.cast<std::string>(), value);
    }
    cfg.validate();
    return cfg;
}

py::dict metrics_dict(const MetricsReport& r) {
    py::dict d;
    const auto v = r.values();
    for (std::size_t k = 0; k < MetricsReport::kCount; ++k) d[py::str(std::string(MetricsReport::kKeys[k]))] = v[k];
    return d;
}

py::object json_to_py(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_adrl, m) {
    m.doc() = "Incomplete multi-view multi-label learning";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);

    py::class_<MultiViewDataset>(m, "Dataset")
        .def(py::init([](const std::vector<Array>& views, const Array& labels) {
                 std::vector<Matrix> vs;
                 for (const Array& a : views) vs.push_back(from_numpy(a));
                 return make_dataset(std::move(vs), from_numpy(labels));
             }),
             py::arg("views"), py::arg("labels"))
        .def_property_readonly("num_samples", &MultiViewDataset::num_samples)
        .def_property_readonly("num_views", &MultiViewDataset::num_views)
        .def_property_readonly("num_labels", &MultiViewDataset::num_labels)
        .def_property_readonly("views",
                               [](const MultiViewDataset& d) {
                                   py::list out;
                                   for (const Matrix& v : d.views) out.append(to_numpy(v));
                                   return out;
                               })
        .def_property("labels", [](const MultiViewDataset& d) { return to_numpy(d.labels); },
                      [](MultiViewDataset& d, const Array& a) { d.labels = from_numpy(a); })
        .def_property("view_mask", [](const MultiViewDataset& d) { return to_numpy(d.view_mask); },
                      [](MultiViewDataset& d, const Array& a) { d.view_mask = from_numpy(a); })
        .def_property("label_mask", [](const MultiViewDataset& d) { return to_numpy(d.label_mask); },
                      [](MultiViewDataset& d, const Array& a) { d.label_mask = from_numpy(a); })
        .def_property_readonly("split",
                               [](const MultiViewDataset& d) {
                                   std::vector<int> s;
                                   for (Split x : d.split) s.push_back(static_cast<int>(x));
                                   return s;
                               })
        .def("validate", &MultiViewDataset::validate)
        .def("save", [](const MultiViewDataset& d, const std::filesystem::path& dir) { write_dataset(d, dir); })
        .def_static("load", [](const std::filesystem::path& p) { return load_dataset(p); });

    m.def(
        "generate_synthetic",
        [](std::size_t n, std::size_t v, std::size_t c, std::size_t shared_dim, std::size_t private_dim,
           double noise, std::uint64_t seed) {
            return generate_synthetic({n, v, c, shared_dim, private_dim, noise, seed});
        },
        py::arg("n") = 2000, py::arg("v") = 2, py::arg("c") = 6, py::arg("shared_dim") = 8,
        py::arg("private_dim") = 8, py::arg("noise") = 0.1, py::arg("seed") = 0);

    m.def(
        "apply_missingness",
        [](const MultiViewDataset& ds, double fmr, double lmr, std::uint64_t seed) {
            return apply_missingness(ds, {fmr, lmr, seed});
        },
        py::arg("dataset"), py::arg("fmr"), py::arg("lmr"), py::arg("seed") = 0);

    m.def(
        "split_dataset",
        [](const MultiViewDataset& ds, std::array<double, 3> ratios, std::uint64_t seed) {
            return split_dataset(ds, ratios, seed);
        },
        py::arg("dataset"), py::arg("ratios") = std::array<double, 3>{7, 1, 2}, py::arg("seed") = 0);

    m.def(
        "complete_views",
        [](const MultiViewDataset& ds, double tau, double percentile, std::size_t k) {
            py::list out;
            for (const Matrix& v : complete_views(ds, {tau, percentile, k})) out.append(to_numpy(v));
            return out;
        },
        py::arg("dataset"), py::arg("tau") = 0.5, py::arg("percentile") = 90.0, py::arg("k") = 10);

    m.def(
        "evaluate",
        [](const Array& scores, const Array& labels) {
            return metrics_dict(evaluate(from_numpy(scores), from_numpy(labels)));
        },
        py::arg("scores"), py::arg("labels"));

    m.def("format_mean_std", &format_mean_std, py::arg("mean"), py::arg("std"));

    m.def(
        "train",
        [](const MultiViewDataset& ds, const py::dict& config) {
            const TrainConfig cfg = make_config(config);
            RunRecord run;
            {
                py::gil_scoped_release release;
                run = train(ds, cfg);
            }
            py::dict out = json_to_py(run.summary_json());
            py::list epochs;
            for (const EpochRecord& e : run.epochs) epochs.append(json_to_py(e.to_json()));
            out["epochs"] = epochs;
            out["wall_seconds"] = run.wall_seconds;
            return out;
        },
        py::arg("dataset"), py::arg("config") = py::dict());

    m.def(
        "gradcheck",
        [](std::uint64_t seed, const std::string& variant, double step, double tol) {
            GradCheckSetup setup;
            setup.seed = seed;
            setup.variant = parse_variant(variant);
            const GradCheckReport rep = model_gradcheck(setup, step, tol);
            py::dict d;
            d["passed"] = rep.passed;
            d["max_rel_error"] = rep.max_rel_error;
            d["failures"] = rep.failures.size();
            return d;
        },
        py::arg("seed") = 0, py::arg("variant") = "full", py::arg("step") = 1e-5, py::arg("tol") = 1e-4);
}
