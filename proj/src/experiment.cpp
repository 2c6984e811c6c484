#include "isaclab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "isaclab/baselines.hpp"
#include "isaclab/checkpoint.hpp"
#include "isaclab/errors.hpp"
#include "isaclab/fixed_point.hpp"
#include "isaclab/plot.hpp"

#ifndef ISACLAB_VERSION
#define ISACLAB_VERSION "0.0.0"
#endif

namespace isac::experiment {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

// Stream purposes, kept apart so adding one never shifts another.
constexpr std::uint64_t kScenarioStream = 0x73636e;
constexpr std::uint64_t kTrainSeed = 0x747273;
constexpr std::uint64_t kEvalStream = 0x657661;
constexpr std::uint64_t kDistStream = 0x647374;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string point_label(SweepVar var, double v) { return to_string(var) + "=" + format_number(v); }

}  // namespace

std::string code_version() { return ISACLAB_VERSION; }

SweepVar parse_sweep_var(const std::string& name) {
    if (name == "power") return SweepVar::Power;
    if (name == "n_bs") return SweepVar::NBs;
    if (name == "n_users") return SweepVar::NUsers;
    if (name == "n_targets") return SweepVar::NTargets;
    if (name == "alpha") return SweepVar::Alpha;
    if (name == "csi") return SweepVar::Csi;
    throw ConfigError("unknown sweep variable '" + name + "' (expected power, n_bs, n_users, n_targets, alpha or csi)");
}

std::string to_string(SweepVar var) {
    switch (var) {
        case SweepVar::Power: return "power";
        case SweepVar::NBs: return "n_bs";
        case SweepVar::NUsers: return "n_users";
        case SweepVar::NTargets: return "n_targets";
        case SweepVar::Alpha: return "alpha";
        case SweepVar::Csi: return "csi";
    }
    return "?";
}

const std::vector<double>& sweep_grid(const ExperimentConfig& cfg, SweepVar var) {
    switch (var) {
        case SweepVar::Power: return cfg.sweep.power_dbm;
        case SweepVar::NBs: return cfg.sweep.n_bs;
        case SweepVar::NUsers: return cfg.sweep.n_users;
        case SweepVar::NTargets: return cfg.sweep.n_targets;
        case SweepVar::Alpha: return cfg.sweep.alpha_sen;
        case SweepVar::Csi: return cfg.sweep.csi;
    }
    throw PreconditionError("bad sweep variable");
}

ExperimentConfig apply_point(const ExperimentConfig& cfg, SweepVar var, double v) {
    ExperimentConfig c = cfg;
    switch (var) {
        case SweepVar::Power: c.power.power_dbm = v; break;
        case SweepVar::NBs: c.scenario.dims.n_bs = static_cast<int>(v); break;
        case SweepVar::NUsers: c.scenario.dims.n_users = static_cast<int>(v); break;
        case SweepVar::NTargets: c.scenario.dims.n_targets = static_cast<int>(v); break;
        case SweepVar::Alpha:
            c.weights.alpha_sen = v;
            c.weights.alpha_com = 1.0 - v;
            break;
        case SweepVar::Csi: {
            CsiErrorSpec& s = c.csi.spec;
            s.eps_com = s.eps_sen = s.sigma2_com = s.sigma2_sen = 0.0;
            if (v == 0.0) {
                s.model = CsiErrorModel::None;
                break;
            }
            s.model = parse_csi_model(cfg.sweep.csi_model);
            if (s.model == CsiErrorModel::Bounded) s.eps_com = s.eps_sen = v;
            else if (s.model == CsiErrorModel::Gaussian) s.sigma2_com = s.sigma2_sen = v;
            break;
        }
    }
    return c;
}

Scenario draw_scenario(const ExperimentConfig& cfg, std::uint64_t draw) {
    ScenarioConfig sc = cfg.scenario;
    sc.csi = cfg.csi.spec;
    RngStream rng(cfg.seed, {kScenarioStream, draw});
    return generate_scenario(sc, rng);
}

Evaluation evaluate(const ExperimentConfig& cfg, const Scenario& sc, const BeamformerSet& beams, std::uint64_t draw) {
    const ObjectiveSetup setup = cfg.objective();
    Evaluation e;
    if (cfg.csi.spec.model == CsiErrorModel::None) {
        const SinrReport r = wscsc(sc.channels, beams, setup.weights, setup.noise, setup.receive);
        e.wscsc = r.wscsc;
        e.scc = r.scc;
        e.ssc = r.ssc;
        return e;
    }
    const RngStream root(cfg.seed, {kEvalStream, draw});
    const auto sampler = [&](std::size_t k) {
        RngStream r = root.fork(k);
        return sample_error_around(sc.csi.estimated, cfg.csi.spec, r);
    };
    const ExpectedObjective x = wscsc_expected(sampler, beams, setup.weights, setup.noise,
                                               static_cast<std::size_t>(cfg.csi.eval_draws), setup.receive,
                                               setup.eta_in_sensing);
    e.wscsc = x.mean;
    e.scc = x.mean_scc;
    e.ssc = x.mean_ssc;
    e.wscsc_std = x.stddev;
    return e;
}

TrainedModel train_model(const ExperimentConfig& cfg, const Scenario& sc, std::uint64_t draw) {
    gnn::GnnConfig g = cfg.gnn;
    g.dims = cfg.scenario.dims;
    gnn::TrainConfig t = cfg.train;
    t.csi = cfg.csi.spec;
    t.seed = RngStream(cfg.seed, {kTrainSeed, draw}).engine()();
    TrainedModel m{gnn::init_params(g, t.seed), {}};
    gnn::ChannelSampler sampler;
    if (t.mode == gnn::TrainMode::Scenario) {
        sampler = [&sc](std::size_t, std::size_t) { return sc.csi.estimated; };
    } else {
        ScenarioConfig scfg = cfg.scenario;
        scfg.csi = cfg.csi.spec;
        const RngStream root(cfg.seed, {kDistStream, draw});
        sampler = [scfg, root](std::size_t it, std::size_t s) {
            RngStream r = root.fork(it).fork(s);
            return generate_scenario(scfg, r).csi.estimated;
        };
    }
    m.trace = gnn::train(m.params, t, cfg.objective(), sampler).trace;
    return m;
}

SchemeResult run_scheme(const ExperimentConfig& cfg, const std::string& scheme, const Scenario& sc, std::uint64_t draw) {
    const auto t0 = std::chrono::steady_clock::now();
    SchemeResult r;
    r.scheme = scheme;
    BeamformerSet beams;
    if (scheme == "gnn") {
        const TrainedModel m = train_model(cfg, sc, draw);
        beams = gnn::forward_values(m.params, sc.csi.estimated, cfg.power.linear().power);
    } else {
        baselines::BaselineOptions opt;
        opt.centralized = cfg.sweep.centralized_zf;
        beams = baselines::run_baseline(baselines::parse_baseline(scheme), sc.csi.estimated, cfg.objective(),
                                        cfg.scenario.dims.n_rf, opt)
                    .beams;
    }
    r.eval = evaluate(cfg, sc, beams, draw);
    if (!std::isfinite(r.eval.wscsc)) throw NumericError(scheme + " produced a non-finite WSCSC");
    r.seconds = seconds_since(t0);
    return r;
}

SweepResult run_sweep(const ExperimentConfig& cfg, SweepVar var, std::ostream* log) {
    const auto& grid = sweep_grid(cfg, var);
    std::vector<ExperimentConfig> points;
    for (double v : grid) {
        ExperimentConfig p = apply_point(cfg, var, v);
        try {
            p.validate();
        } catch (const ConfigError& e) {
            throw ConfigError("sweep point " + point_label(var, v) + ": " + e.what());
        }
        points.push_back(std::move(p));
    }
    const std::size_t draws = static_cast<std::size_t>(cfg.sweep.draws);
    const std::size_t n_schemes = cfg.sweep.schemes.size();
    const std::size_t tasks = points.size() * draws;

    struct Slot {
        std::vector<std::optional<SweepRow>> rows;
        std::vector<Failure> failures;
    };
    std::vector<Slot> slots(tasks);
    std::atomic<std::size_t> next{0};
    std::mutex log_mu;

    const auto work = [&] {
        for (std::size_t task = next++; task < tasks; task = next++) {
            const std::size_t p = task / draws, d = task % draws;
            const ExperimentConfig& pc = points[p];
            Slot& slot = slots[task];
            slot.rows.resize(n_schemes);
            std::optional<Scenario> sc;
            try {
                sc = draw_scenario(pc, d);
            } catch (const Error& e) {
                for (const auto& s : cfg.sweep.schemes)
                    slot.failures.push_back({point_label(var, grid[p]) + " draw=" + std::to_string(d) + " scheme=" + s,
                                             e.what()});
                continue;
            }
            for (std::size_t k = 0; k < n_schemes; ++k) {
                const std::string& s = cfg.sweep.schemes[k];
                const std::string where = point_label(var, grid[p]) + " draw=" + std::to_string(d) + " scheme=" + s;
                try {
                    const SchemeResult r = run_scheme(pc, s, *sc, d);
                    slot.rows[k] = SweepRow{grid[p], s, static_cast<int>(d), r.eval, r.seconds};
                    if (log) {
                        std::lock_guard lock(log_mu);
                        *log << where << " wscsc=" << format_number(r.eval.wscsc) << '\n';
                    }
                } catch (const Error& e) {
                    slot.failures.push_back({where, e.what()});
                    if (log) {
                        std::lock_guard lock(log_mu);
                        *log << where << " FAILED: " << e.what() << '\n';
                    }
                }
            }
        }
    };
    const std::size_t jobs = std::min<std::size_t>(static_cast<std::size_t>(cfg.sweep.jobs), std::max<std::size_t>(tasks, 1));
    if (jobs <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    SweepResult out;
    out.var = var;
    out.seed = cfg.seed;
    out.expected_rows = tasks * n_schemes;
    for (auto& slot : slots) {
        for (auto& r : slot.rows)
            if (r) out.rows.push_back(std::move(*r));
        for (auto& f : slot.failures) out.failures.push_back(std::move(f));
    }
    return out;
}

std::string sweep_csv(const SweepResult& r) {
    std::ostringstream o;
    o << "var,value,scheme,draw,seed,wscsc,scc,ssc,wscsc_std\n";
    for (const auto& row : r.rows) {
        o << to_string(r.var) << ',' << format_number(row.value) << ',' << row.scheme << ',' << row.draw << ',' << r.seed
          << ',' << format_number(row.eval.wscsc) << ',' << format_number(row.eval.scc) << ','
          << format_number(row.eval.ssc) << ',' << format_number(row.eval.wscsc_std) << '\n';
    }
    return o.str();
}

std::string sweep_timing_csv(const SweepResult& r) {
    std::ostringstream o;
    o << "var,value,scheme,draw,seconds\n";
    for (const auto& row : r.rows) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6f", row.seconds);
        o << to_string(r.var) << ',' << format_number(row.value) << ',' << row.scheme << ',' << row.draw << ',' << buf
          << '\n';
    }
    return o.str();
}

ConvergeResult run_convergence(const ExperimentConfig& cfg, std::ostream* log) {
    ConvergeResult out;
    for (int m : cfg.converge.n_bs) {
        for (double kappa : cfg.converge.kappa) {
            ExperimentConfig c = cfg;
            c.scenario.dims.n_bs = m;
            c.scenario.kappa_com = c.scenario.kappa_sen = kappa;
            const std::string where = "M=" + std::to_string(m) + " kappa=" + format_number(kappa);
            try {
                c.validate();
                const Scenario sc = draw_scenario(c, 0);
                TrainedModel model = train_model(c, sc, 0);
                if (log)
                    *log << where << " final wscsc=" << format_number(model.trace.empty() ? 0.0 : model.trace.back().wscsc)
                         << '\n';
                out.series.push_back({m, kappa, std::move(model.trace)});
            } catch (const ConfigError&) {
                throw;
            } catch (const Error& e) {
                out.failures.push_back({where, e.what()});
                if (log) *log << where << " FAILED: " << e.what() << '\n';
            }
        }
    }
    return out;
}

std::string converge_csv(const ConvergeResult& r) {
    std::ostringstream o;
    o << "iteration,epoch,M,kappa,wscsc,scc,ssc,loss,learning_rate\n";
    for (const auto& s : r.series) {
        for (const auto& t : s.trace) {
            o << t.iteration << ',' << t.epoch << ',' << s.n_bs << ',' << format_number(s.kappa) << ','
              << format_number(t.wscsc) << ',' << format_number(t.scc) << ',' << format_number(t.ssc) << ','
              << format_number(t.loss) << ',' << format_number(t.learning_rate) << '\n';
        }
    }
    return o.str();
}

std::vector<LatencyRow> run_latency(const ExperimentConfig& cfg, const gnn::GnnParams& params, std::ostream* log) {
    ExperimentConfig c = cfg;
    c.scenario.dims = params.config.dims;
    c.csi.spec.model = CsiErrorModel::None;
    std::vector<Scenario> scenarios;
    for (int d = 0; d < cfg.latency.accuracy_draws; ++d) scenarios.push_back(draw_scenario(c, static_cast<std::uint64_t>(d)));
    const auto layers = fpga::network_layers(params.config, params.config.dims.n_users, params.config.dims.n_targets);
    std::vector<LatencyRow> out;
    for (int bits : cfg.latency.bits) {
        std::vector<double> deltas;
        fpga::EmulatorOptions opt;
        opt.bits = bits;
        opt.fused = cfg.latency.accelerator.fused;
        for (const auto& sc : scenarios)
            deltas.push_back(fpga::fused_inference(params, sc.channels, c.objective(), opt).relative_delta);
        std::sort(deltas.begin(), deltas.end());
        double median = 0.0, worst = 0.0;
        if (!deltas.empty()) {
            const std::size_t n = deltas.size();
            median = n % 2 ? deltas[n / 2] : 0.5 * (deltas[n / 2 - 1] + deltas[n / 2]);
            worst = deltas.back();
        }
        for (int bus : cfg.latency.bus_bits) {
            fpga::AcceleratorConfig a = cfg.latency.accelerator;
            a.bus_bits = bus;
            LatencyRow row{fpga::latency_estimate(layers, a, bits), median, worst};
            if (log)
                *log << "bits=" << bits << " bus=" << bus << " cycles=" << row.report.total_cycles
                     << " ms=" << format_number(row.report.total_ms) << " rel_delta=" << format_number(median) << '\n';
            out.push_back(std::move(row));
        }
    }
    return out;
}

std::string latency_csv(const std::vector<LatencyRow>& rows) {
    std::ostringstream o;
    o << "bits,bus_bits,fused,total_cycles,total_ms,compute_cycles,transfer_cycles,weight_load_cycles,"
         "median_rel_delta,max_rel_delta\n";
    for (const auto& r : rows) {
        const auto& p = r.report;
        o << p.bits << ',' << p.config.bus_bits << ',' << (p.config.fused ? 1 : 0) << ',' << p.total_cycles << ','
          << format_number(p.total_ms) << ',' << p.compute_cycles << ',' << p.transfer_cycles << ','
          << p.weight_load_cycles << ',' << format_number(r.median_rel_delta) << ',' << format_number(r.max_rel_delta)
          << '\n';
    }
    return o.str();
}

// ---- files -------------------------------------------------------------------

std::string format_number(double x) {
    if (x == 0.0) return "0";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + tmp.string());
        out << text;
        if (!out) throw ConfigError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string metadata_json(const ExperimentConfig& cfg, const std::string& command, const std::string& extra_json) {
    ojson doc{{"command", command},
              {"code_version", code_version()},
              {"seed", cfg.seed},
              {"config_hash", config_hash(cfg)}};
    const ojson extra = ojson::parse(extra_json);
    for (auto it = extra.begin(); it != extra.end(); ++it) doc[it.key()] = it.value();
    doc["config"] = ojson::parse(config_to_json(cfg));
    return doc.dump(2) + "\n";
}

namespace {

ojson failures_json(const std::vector<Failure>& fs) {
    ojson a = ojson::array();
    for (const auto& f : fs) a.push_back({{"where", f.where}, {"error", f.error}});
    return a;
}

}  // namespace

// ---- commands ----------------------------------------------------------------

int command_train(const ExperimentConfig& cfg, const fs::path& out_dir, std::ostream& log) {
    const fs::path dir = out_dir / "train";
    const Scenario sc = draw_scenario(cfg, 0);
    TrainedModel m = train_model(cfg, sc, 0);
    gnn::save_checkpoint(m.params, dir / "checkpoint.json");
    ConvergeResult trace;
    trace.series.push_back({cfg.scenario.dims.n_bs, cfg.scenario.kappa_com, m.trace});
    write_text(dir / "trace.csv", converge_csv(trace));
    const BeamformerSet beams = gnn::forward_values(m.params, sc.csi.estimated, cfg.power.linear().power);
    const Evaluation e = evaluate(cfg, sc, beams, 0);
    log << "trained " << m.params.parameter_count() << " parameters, wscsc=" << format_number(e.wscsc)
        << " scc=" << format_number(e.scc) << " ssc=" << format_number(e.ssc) << '\n';
    const ojson extra{{"parameters", m.params.parameter_count()},
                      {"wscsc", e.wscsc},
                      {"scc", e.scc},
                      {"ssc", e.ssc},
                      {"checkpoint", (dir / "checkpoint.json").string()}};
    write_text(dir / "train.meta.json", metadata_json(cfg, "train", extra.dump()));
    return 0;
}

int command_converge(const ExperimentConfig& cfg, const fs::path& out_dir, std::ostream& log) {
    const fs::path dir = out_dir / "converge";
    const ConvergeResult r = run_convergence(cfg, &log);
    write_text(dir / "converge.csv", converge_csv(r));
    const ojson extra{{"series", r.series.size()}, {"failures", failures_json(r.failures)}};
    write_text(dir / "converge.meta.json", metadata_json(cfg, "converge", extra.dump()));
    return r.failures.empty() ? 0 : 1;
}

int command_sweep(const ExperimentConfig& cfg, SweepVar var, const fs::path& out_dir, std::ostream& log) {
    const fs::path dir = out_dir / "sweep";
    const std::string stem = "sweep_" + to_string(var);
    const SweepResult r = run_sweep(cfg, var, &log);
    write_text(dir / (stem + ".csv"), sweep_csv(r));
    write_text(dir / (stem + ".timing.csv"), sweep_timing_csv(r));
    const ojson extra{{"var", to_string(var)},
                      {"rows", r.rows.size()},
                      {"expected_rows", r.expected_rows},
                      {"failures", failures_json(r.failures)}};
    write_text(dir / (stem + ".meta.json"), metadata_json(cfg, "sweep", extra.dump()));
    if (!r.failures.empty()) log << r.failures.size() << " unit(s) failed; see " << (dir / (stem + ".meta.json")).string() << '\n';
    return r.failures.empty() ? 0 : 1;
}

int command_latency(const ExperimentConfig& cfg, const fs::path& out_dir, std::ostream& log) {
    const fs::path dir = out_dir / "latency";
    const fs::path ckpt = cfg.latency.checkpoint.empty() ? out_dir / "train" / "checkpoint.json" : fs::path(cfg.latency.checkpoint);
    const gnn::GnnParams params = gnn::load_checkpoint(ckpt);
    const auto rows = run_latency(cfg, params, &log);
    for (const auto& r : rows) {
        const std::string tag = "b" + std::to_string(r.report.bits) + "_bus" + std::to_string(r.report.config.bus_bits);
        write_text(dir / ("report_" + tag + ".json"), fpga::to_json(r.report) + "\n");
        write_text(dir / ("layers_" + tag + ".csv"), fpga::layers_csv(r.report));
    }
    write_text(dir / "latency.csv", latency_csv(rows));
    const ojson extra{{"checkpoint", ckpt.string()}, {"rows", rows.size()}};
    write_text(dir / "latency.meta.json", metadata_json(cfg, "latency", extra.dump()));
    return 0;
}

int command_plot(const std::vector<fs::path>& csv_files, const fs::path& out_dir, std::ostream& log) {
    std::vector<fs::path> files = csv_files;
    if (files.empty()) {
        for (const char* sub : {"converge", "sweep", "latency"}) {
            const fs::path d = out_dir / sub;
            if (!fs::is_directory(d)) continue;
            for (const auto& e : fs::directory_iterator(d)) {
                const std::string name = e.path().filename().string();
                if (e.path().extension() == ".csv" && name.find(".timing") == std::string::npos &&
                    name.rfind("layers_", 0) != 0)
                    files.push_back(e.path());
            }
        }
        std::sort(files.begin(), files.end());
        if (files.empty()) throw ConfigError("no result CSVs under " + out_dir.string() + "; run converge, sweep or latency first");
    }
    for (const auto& f : files) {
        const plot::CsvTable t = plot::parse_csv(read_text(f));
        const std::string stem = f.stem().string();
        const std::string svg = plot::render_svg(plot::figure_from_csv(t, stem));
        const fs::path target = out_dir / "plots" / (stem + ".svg");
        write_text(target, svg);
        log << "wrote " << target.string() << '\n';
    }
    return 0;
}

}  // namespace isac::experiment
