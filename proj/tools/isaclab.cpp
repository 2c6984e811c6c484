// Command-line front end: train, converge, sweep, latency, plot.
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "isaclab/config.hpp"
#include "isaclab/errors.hpp"
#include "isaclab/experiment.hpp"

namespace {

struct Common {
    std::string config;
    std::uint64_t seed = 0;
    std::string out;
    std::string schemes;
    int draws = 0;
    int jobs = 0;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "JSON configuration file (defaults apply when omitted)");
    cmd->add_option("--seed", c.seed, "override the master seed");
    cmd->add_option("--out", c.out, "output root directory (default: output_dir from the config)");
}

isac::ExperimentConfig resolve(const Common& c, CLI::App* cmd) {
    isac::ExperimentConfig cfg = c.config.empty() ? isac::parse_config("") : isac::load_config(c.config);
    if (cmd->count("--seed")) cfg.seed = c.seed;
    if (cmd->get_option_no_throw("--draws") && cmd->count("--draws")) cfg.sweep.draws = c.draws;
    if (cmd->get_option_no_throw("--jobs") && cmd->count("--jobs")) cfg.sweep.jobs = c.jobs;
    if (cmd->get_option_no_throw("--schemes") && cmd->count("--schemes")) {
        cfg.sweep.schemes.clear();
        std::stringstream ss(c.schemes);
        for (std::string s; std::getline(ss, s, ',');)
            if (!s.empty()) cfg.sweep.schemes.push_back(s);
    }
    if (!c.out.empty()) cfg.output_dir = c.out;
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    namespace ex = isac::experiment;
    CLI::App app{"Cell-free ISAC beamforming lab"};
    app.require_subcommand(1);

    Common train_o, conv_o, sweep_o, lat_o;
    auto* train = app.add_subcommand("train", "train a network on the seed's scenario and save a checkpoint");
    add_common(train, train_o);
    auto* conv = app.add_subcommand("converge", "record WSCSC training traces per (M, kappa)");
    add_common(conv, conv_o);
    auto* sweep = app.add_subcommand("sweep", "compare schemes across one swept parameter");
    add_common(sweep, sweep_o);
    std::string var;
    sweep->add_option("--var", var, "power | n_bs | n_users | n_targets | alpha | csi")->required();
    sweep->add_option("--schemes", sweep_o.schemes, "comma-separated subset of gnn,mmse,zf,mrt");
    sweep->add_option("--draws", sweep_o.draws, "Monte Carlo draws per point")->check(CLI::PositiveNumber);
    sweep->add_option("--jobs", sweep_o.jobs, "worker threads")->check(CLI::PositiveNumber);
    auto* lat = app.add_subcommand("latency", "fixed-point accuracy and accelerator latency for a checkpoint");
    add_common(lat, lat_o);
    std::string ckpt;
    lat->add_option("--checkpoint", ckpt, "checkpoint path (default: <out>/train/checkpoint.json)");
    auto* plt = app.add_subcommand("plot", "render SVG figures from result CSVs");
    std::string plot_out = "out";
    std::vector<std::string> plot_files;
    plt->add_option("--out", plot_out, "output root; figures go to <out>/plots");
    plt->add_option("csv", plot_files, "CSV files (default: every result CSV under <out>)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) {
            const auto cfg = resolve(train_o, train);
            return ex::command_train(cfg, cfg.output_dir, std::cerr);
        }
        if (*conv) {
            const auto cfg = resolve(conv_o, conv);
            return ex::command_converge(cfg, cfg.output_dir, std::cerr);
        }
        if (*sweep) {
            const auto v = ex::parse_sweep_var(var);
            const auto cfg = resolve(sweep_o, sweep);
            return ex::command_sweep(cfg, v, cfg.output_dir, std::cerr);
        }
        if (*lat) {
            auto cfg = resolve(lat_o, lat);
            if (!ckpt.empty()) cfg.latency.checkpoint = ckpt;
            return ex::command_latency(cfg, cfg.output_dir, std::cerr);
        }
        if (*plt) {
            std::vector<std::filesystem::path> files(plot_files.begin(), plot_files.end());
            return ex::command_plot(files, plot_out, std::cerr);
        }
    } catch (const isac::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
