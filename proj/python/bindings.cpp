#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mmson/channel.hpp"
#include "mmson/config.hpp"
#include "mmson/metrics.hpp"
#include "mmson/pipeline.hpp"
#include "mmson/qlearn.hpp"
#include "mmson/serialize.hpp"

namespace py = pybind11;
using namespace mmson;

namespace {

RunConfig config_from(const std::string& text, std::optional<std::uint64_t> seed, std::optional<std::string> out) {
    RunConfig c = parse_config(text);
    if (seed) c.seed = *seed;
    if (out) c.out_dir = *out;
    c.validate();
    return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "mmWave self-organizing network simulator core";

    // Translators run newest first, so the base class goes first.
    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
    py::register_exception<StageError>(m, "StageError", base.ptr());

    m.def("pathloss_friis_db", &pathloss_friis_db, py::arg("distance_m"), py::arg("carrier_freq_hz") = 28e9);
    m.def(
        "pathloss_nlos_db",
        [](double d, double shadow) { return pathloss_nlos_db(d, ChannelParams{}, shadow); },
        py::arg("distance_m"), py::arg("shadow_std_normal") = 0.0);
    m.def("capacity", &capacity, py::arg("sinr_linear"));
    m.def("reward_cdpq", &reward_cdpq, py::arg("capacity"), py::arg("qos_sinr") = 2.83);
    m.def("reward_expq", &reward_expq, py::arg("capacity"), py::arg("qos_sinr") = 2.83, py::arg("shape") = 1.0);
    m.def(
        "jain_index", [](const std::vector<double>& v) { return jain_index(v); }, py::arg("values"));

    m.def("default_config", [] { return serialize_config(RunConfig{}); });
    m.def(
        "normalize_config", [](const std::string& text) { return serialize_config(parse_config(text)); },
        py::arg("text"));

    m.def(
        "deploy_json",
        [](const std::string& text, std::uint64_t seed) {
            const auto c = config_from(text, seed, std::nullopt);
            return to_json(generate_layout(c.deployment, c.seed)).dump();
        },
        py::arg("config_text"), py::arg("seed"));
    m.def(
        "cluster_json",
        [](const std::string& text, const std::string& layout, std::uint64_t seed) {
            const auto c = config_from(text, seed, std::nullopt);
            py::gil_scoped_release release;
            return to_json(run_clustering(layout_from_json(json::parse(layout)), c.floc, seed)).dump();
        },
        py::arg("config_text"), py::arg("layout_json"), py::arg("seed"));
    m.def(
        "verify_json",
        [](const std::string& text, const std::string& assignment, const std::string& layout) {
            const auto c = config_from(text, std::nullopt, std::nullopt);
            std::vector<std::string> out;
            for (const auto& v : verify_assignment(assignment_from_json(json::parse(assignment)),
                                                   layout_from_json(json::parse(layout)), c.floc.unit_distance_m,
                                                   c.floc.outband_distance_m))
                out.push_back(v.rule + ": " + v.detail);
            return out;
        },
        py::arg("config_text"), py::arg("assignment_json"), py::arg("layout_json"));
    m.def(
        "run_pipeline",
        [](const std::string& text, std::uint64_t seed, const std::string& out) {
            const auto c = config_from(text, seed, out);
            py::gil_scoped_release release;
            run_pipeline(c);
        },
        py::arg("config_text"), py::arg("seed"), py::arg("out_dir"));
    m.def(
        "sweep",
        [](const std::string& text, const std::string& out) {
            const auto c = config_from(text, std::nullopt, out);
            py::gil_scoped_release release;
            std::filesystem::create_directories(c.out_dir);
            write_text(std::filesystem::path(c.out_dir) / artifact::kConfig, serialize_config(c));
            write_sweep(c.out_dir, sweep_cluster_sizes(c));
        },
        py::arg("config_text"), py::arg("out_dir"));
    m.def(
        "report", [](const std::string& dir) { return report(dir); }, py::arg("out_dir"));
}
