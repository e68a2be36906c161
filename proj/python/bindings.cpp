#include "mstm/experiment.hpp"
#include "mstm/linear.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace mstm;

namespace {

ArchSpec spec_from_str(const std::string& spec_json) {
    return spec_from_json(nlohmann::json::parse(spec_json));
}

TargetSpec targets_from_py(const py::object& y, int n_classes) {
    if (n_classes > 0) {
        HardTargets ht;
        ht.labels = y.cast<std::vector<int>>();
        ht.n_classes = n_classes;
        return ht;
    }
    return RealTargets{y.cast<Vector>()};
}

TransferMethod method_from_py(const std::string& name, double temperature) {
    if (name == "distill") return Distill{temperature};
    if (name == "confidence_weight") return ConfidenceWeight{};
    throw std::invalid_argument("method must be distill|confidence_weight");
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "multihop knowledge transfer core";

    py::class_<TrainedModel>(m, "Model")
        .def_static(
            "fit",
            [](const std::string& spec_json, const Matrix& X, const py::object& y,
               int n_classes, std::uint64_t seed) {
                FitConfig cfg;
                cfg.seed = seed;
                return fit(spec_from_str(spec_json), X, targets_from_py(y, n_classes), cfg);
            },
            py::arg("spec"), py::arg("X"), py::arg("y"), py::arg("n_classes") = 0,
            py::arg("seed") = 0)
        .def("predict", [](const TrainedModel& m_, const Matrix& X) { return m_.predict(X); })
        .def_property_readonly("n_classes", [](const TrainedModel& m_) { return m_.n_classes; })
        .def("to_json", [](const TrainedModel& m_) { return model_to_json(m_).dump(); })
        .def_static("from_json", [](const std::string& s) {
            return model_from_json(nlohmann::json::parse(s));
        });

    m.def(
        "hop",
        [](const TrainedModel& teacher, const std::string& student_spec, const Matrix& X,
           const py::object& y, int n_classes, const std::string& method, double temperature,
           std::uint64_t seed) {
            FitConfig cfg;
            cfg.seed = seed;
            return hop_transfer(teacher, spec_from_str(student_spec), X,
                                targets_from_py(y, n_classes),
                                method_from_py(method, temperature), cfg);
        },
        py::arg("teacher"), py::arg("student_spec"), py::arg("X"), py::arg("y"),
        py::arg("n_classes") = 0, py::arg("method") = "distill", py::arg("temperature") = 4.0,
        py::arg("seed") = 0);

    m.def("subset_size", &subset_size, py::arg("k"), py::arg("m"), py::arg("delta"));

    m.def(
        "submodularity_ratio",
        [](const std::function<double(std::vector<int>)>& f, const std::vector<int>& L,
           const std::vector<int>& P) -> py::object {
            const auto r = submodularity_ratio(
                [&](const std::vector<int>& s) { return f(s); }, L, P);
            if (!r) return py::none();
            return py::float_(*r);
        },
        py::arg("f"), py::arg("L"), py::arg("P"));

    m.def(
        "synthetic_dataset",
        [](double noise_fraction, std::uint64_t seed) {
            SyntheticSpec spec;
            spec.noise_fraction = noise_fraction;
            spec.seed = seed;
            const SyntheticData d = synthetic_poly_dataset(spec);
            return py::make_tuple(d.x, d.clean, d.noisy);
        },
        py::arg("noise_fraction") = 0.2, py::arg("seed") = 0);

    m.def(
        "run_synthetic",
        [](const std::string& preset, std::uint64_t seed) {
            SyntheticPreset p;
            if (preset == "noisy-bisquare")
                p = SyntheticPreset::NoisyBisquare;
            else if (preset == "clean-bisquare")
                p = SyntheticPreset::CleanBisquare;
            else if (preset == "noisy-leastsquares")
                p = SyntheticPreset::NoisyLeastSquares;
            else
                throw std::invalid_argument("unknown preset '" + preset + "'");
            const SyntheticRunResult r = run_synthetic_preset(p, seed);
            py::dict out;
            out["mse_one_hop"] = r.mse_one_hop;
            out["mse_two_hop"] = r.mse_two_hop;
            out["coef_one_hop"] = r.coef_one_hop;
            out["coef_two_hop"] = r.coef_two_hop;
            out["x"] = r.data.x;
            out["pred_one_hop"] = r.pred_one_hop;
            out["pred_two_hop"] = r.pred_two_hop;
            return out;
        },
        py::arg("preset"), py::arg("seed") = 0);

    m.def(
        "run_config",
        [](const std::string& config_path, const std::string& out_dir, int jobs) {
            ExperimentConfig cfg = config_from_file(config_path);
            if (!out_dir.empty()) cfg.output_dir = out_dir;
            const ReportBundle bundle = run_experiment(cfg, jobs);
            emit_report(bundle, cfg.output_dir);
            py::list rows;
            for (const auto& row : bundle.rows)
                rows.append(py::make_tuple(row.method, row.repeat, row.metric, row.value));
            return rows;
        },
        py::arg("config_path"), py::arg("out_dir") = "", py::arg("jobs") = 1);

    m.def("accuracy", &accuracy, py::arg("predictions"), py::arg("labels"));
    m.def("mse", &mse, py::arg("predictions"), py::arg("targets"));
    m.def("cross_entropy", &cross_entropy, py::arg("predictions"), py::arg("labels"));
    m.def("temperature_soften", &temperature_soften, py::arg("probs"), py::arg("temperature"));
}
