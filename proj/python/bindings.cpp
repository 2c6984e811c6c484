#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "isaclab/accelerator.hpp"
#include "isaclab/baselines.hpp"
#include "isaclab/checkpoint.hpp"
#include "isaclab/config.hpp"
#include "isaclab/errors.hpp"
#include "isaclab/experiment.hpp"
#include "isaclab/fixed_point.hpp"
#include "isaclab/gnn.hpp"

namespace py = pybind11;
using namespace isac;
namespace ex = isac::experiment;

namespace {

ExperimentConfig config_of(const std::string& text) {
    ExperimentConfig c = parse_config(text);
    c.gnn.dims = c.scenario.dims;
    return c;
}

py::dict report_dict(const SinrReport& r) {
    py::dict d;
    d["wscsc"] = r.wscsc;
    d["scc"] = r.scc;
    d["ssc"] = r.ssc;
    d["gamma_user"] = r.gamma_user;
    d["gamma_target"] = r.gamma_target;
    return d;
}

py::dict beams_dict(const BeamformerSet& b) {
    py::dict d;
    d["analog"] = b.analog;
    d["digital"] = b.digital;
    return d;
}

BeamformerSet beams_from(const std::vector<CMatrix>& analog, const std::vector<CMatrix>& digital) {
    if (analog.size() != digital.size()) throw DimensionError("analog and digital lists differ in length");
    return BeamformerSet{analog, digital};
}

}  // namespace

PYBIND11_MODULE(_isaclab, m) {
    m.doc() = "Cell-free ISAC beamforming: channels, metrics, GNN, baselines, fixed-point emulation";

    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);

    m.def("version", &ex::code_version);
    m.def("default_config", [] { return config_to_json(parse_config("")); },
          "Fully resolved default configuration as JSON text.");
    m.def("resolve_config", [](const std::string& text) { return config_to_json(config_of(text)); },
          py::arg("text"), "Validates a JSON configuration and returns the canonical form.");
    m.def("config_hash", [](const std::string& text) { return config_hash(config_of(text)); }, py::arg("text"));

    py::class_<ChannelSet>(m, "ChannelSet")
        .def_readonly("com", &ChannelSet::com, "com[m][i]: N_u x N_t")
        .def_readonly("sen", &ChannelSet::sen, "sen[m][j]: N_r x N_t")
        .def_property_readonly("n_bs", &ChannelSet::n_bs)
        .def_property_readonly("n_users", &ChannelSet::n_users)
        .def_property_readonly("n_targets", &ChannelSet::n_targets);

    m.def(
        "draw_scenario",
        [](const std::string& config, std::uint64_t draw) {
            const Scenario sc = ex::draw_scenario(config_of(config), draw);
            py::dict d;
            d["channels"] = sc.channels;
            d["estimated"] = sc.csi.estimated;
            return d;
        },
        py::arg("config") = "", py::arg("draw") = 0,
        "True and estimated channels of one Monte Carlo draw.");

    m.def(
        "wscsc",
        [](const ChannelSet& ch, const std::vector<CMatrix>& analog, const std::vector<CMatrix>& digital,
           const std::string& config) {
            const ExperimentConfig c = config_of(config);
            const ObjectiveSetup s = c.objective();
            return report_dict(wscsc(ch, beams_from(analog, digital), s.weights, s.noise, s.receive));
        },
        py::arg("channels"), py::arg("analog"), py::arg("digital"), py::arg("config") = "");

    m.def(
        "baseline",
        [](const std::string& kind, const ChannelSet& ch, const std::string& config, bool centralized) {
            const ExperimentConfig c = config_of(config);
            const auto r = baselines::run_baseline(baselines::parse_baseline(kind), ch, c.objective(),
                                                   c.scenario.dims.n_rf, baselines::BaselineOptions{centralized});
            py::dict d = beams_dict(r.beams);
            d["report"] = report_dict(r.report);
            return d;
        },
        py::arg("kind"), py::arg("channels"), py::arg("config") = "", py::arg("centralized") = false);

    py::class_<gnn::GnnParams>(m, "Model")
        .def(py::init([](const std::string& config, std::uint64_t seed) { return gnn::init_params(config_of(config).gnn, seed); }),
             py::arg("config") = "", py::arg("seed") = 1)
        .def_static("load", [](const std::string& path) { return gnn::load_checkpoint(path); }, py::arg("path"))
        .def("save", [](const gnn::GnnParams& p, const std::string& path) { gnn::save_checkpoint(p, path); }, py::arg("path"))
        .def_property_readonly("parameter_count", &gnn::GnnParams::parameter_count)
        .def_readonly("seed", &gnn::GnnParams::seed)
        .def(
            "forward",
            [](const gnn::GnnParams& p, const ChannelSet& ch, double power_mw) {
                return beams_dict(gnn::forward_values(p, ch, power_mw));
            },
            py::arg("channels"), py::arg("power_mw") = 1.0)
        .def(
            "train",
            [](gnn::GnnParams& p, const ChannelSet& ch, const std::string& config) {
                const ExperimentConfig c = config_of(config);
                gnn::TrainConfig t = c.train;
                t.csi = c.csi.spec;
                t.seed = p.seed;
                const auto trace =
                    gnn::train(p, t, c.objective(), [&ch](std::size_t, std::size_t) { return ch; }).trace;
                std::vector<double> w;
                for (const auto& row : trace) w.push_back(row.wscsc);
                return w;
            },
            py::arg("channels"), py::arg("config") = "", "Trains in place on one channel set; returns the WSCSC trace.")
        .def(
            "emulate",
            [](const gnn::GnnParams& p, const ChannelSet& ch, int bits, const std::string& config) {
                fpga::EmulatorOptions o;
                o.bits = bits;
                const auto r = fpga::fused_inference(p, ch, config_of(config).objective(), o);
                py::dict d = beams_dict(r.beams);
                d["report"] = report_dict(r.report);
                d["float_wscsc"] = r.float_wscsc;
                d["relative_delta"] = r.relative_delta;
                return d;
            },
            py::arg("channels"), py::arg("bits") = 16, py::arg("config") = "");

    m.def(
        "latency",
        [](const std::string& config, int bits, int bus_bits) {
            const ExperimentConfig c = config_of(config);
            fpga::AcceleratorConfig a = c.latency.accelerator;
            a.bus_bits = bus_bits;
            const auto layers = fpga::network_layers(c.gnn, c.scenario.dims.n_users, c.scenario.dims.n_targets);
            return fpga::to_json(fpga::latency_estimate(layers, a, bits));
        },
        py::arg("config") = "", py::arg("bits") = 16, py::arg("bus_bits") = 64, "LatencyReport as JSON text.");

    m.def(
        "sweep",
        [](const std::string& config, const std::string& var) {
            const ExperimentConfig c = config_of(config);
            ex::SweepResult r;
            {
                py::gil_scoped_release release;
                r = ex::run_sweep(c, ex::parse_sweep_var(var));
            }
            if (!r.failures.empty()) throw Error(std::to_string(r.failures.size()) + " sweep unit(s) failed: " + r.failures[0].error);
            return ex::sweep_csv(r);
        },
        py::arg("config"), py::arg("var"), "Runs a sweep and returns the result CSV text.");
}
