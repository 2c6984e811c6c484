// Acceptance suite: one PASS/FAIL line per criterion, WARN lines for soft targets.
// Exit status is 0 only when every hard check passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "isaclab/accelerator.hpp"
#include "isaclab/baselines.hpp"
#include "isaclab/config.hpp"
#include "isaclab/errors.hpp"
#include "isaclab/experiment.hpp"
#include "isaclab/fixed_point.hpp"
#include "isaclab/gnn.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace isac;
namespace fs = std::filesystem;
namespace ex = isac::experiment;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int prec = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

struct Outcome {
    bool pass = true;
    std::string detail;
    std::vector<std::string> warnings;
};

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double std_error(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = 0.5 * static_cast<double>(i + j) + 1.0;
        i = j + 1;
    }
    return r;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    const auto rx = ranks(x), ry = ranks(y);
    const double mx = mean(rx), my = mean(ry);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxy += (rx[k] - mx) * (ry[k] - my);
        sxx += (rx[k] - mx) * (rx[k] - mx);
        syy += (ry[k] - my) * (ry[k] - my);
    }
    return sxx > 0 && syy > 0 ? sxy / std::sqrt(sxx * syy) : 0.0;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Mean WSCSC per (value, scheme) of a sweep.
std::map<std::pair<double, std::string>, std::vector<double>> by_point(const ex::SweepResult& r) {
    std::map<std::pair<double, std::string>, std::vector<double>> out;
    for (const auto& row : r.rows) out[{row.value, row.scheme}].push_back(row.eval.wscsc);
    return out;
}

void require_clean(const ex::SweepResult& r) {
    if (!r.failures.empty())
        throw std::runtime_error(std::to_string(r.failures.size()) + " sweep unit(s) failed, first: " +
                                 r.failures[0].where + ": " + r.failures[0].error);
}

// ---- 1 -------------------------------------------------------------------------

Outcome sinr_oracle() {
    const auto t0 = Clock::now();
    const SystemDims d;
    const double noise = 1e-9;
    double worst = 0;
    int instances = 0;
    CsiErrorSpec spec;
    spec.model = CsiErrorModel::Gaussian;
    spec.sigma2_com = spec.sigma2_sen = 0.01;
    spec.relative = true;
    for (std::uint64_t s = 0; s < 100; ++s, ++instances) {
        const ChannelSet ch = testing::random_channels(d, 1000 + s);
        const BeamformerSet bf = testing::random_beams(d, 2000 + s, dbm_to_mw(static_cast<double>(s % 7) * 5 - 10));
        RngStream rng(3000 + s);
        const CsiRealization csi = apply_csi_error(ch, spec, rng);
        for (std::size_t i = 0; i < ch.n_users(); ++i) {
            worst = std::max(worst, testing::rel_err(user_sinr(ch, bf, noise, i), oracle::user_sinr(ch, bf, noise, i)));
            worst = std::max(worst, testing::rel_err(user_sinr_imperfect(csi, bf, noise, i),
                                                     oracle::user_sinr_imperfect(csi, bf, noise, i)));
        }
        for (std::size_t j = 0; j < ch.n_targets(); ++j) {
            for (ReceiveMode mode : {ReceiveMode::Matched, ReceiveMode::Mvdr}) {
                const CVector u = receive_beamformer(ch, bf, noise, j, mode);
                worst = std::max(worst, testing::rel_err(radar_sinr(ch, bf, u, noise, j),
                                                         oracle::radar_sinr(ch, bf, u, noise, j)));
                const CVector ue = receive_beamformer(csi.estimated, bf, noise, j, mode);
                worst = std::max(worst, testing::rel_err(radar_sinr_imperfect(csi, bf, ue, noise, j),
                                                         oracle::radar_sinr_imperfect(csi, bf, ue, noise, j)));
            }
        }
    }
    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = worst < 1e-10 && secs < 30.0;
    o.detail = std::to_string(instances) + " instances, max rel err " + fmt(worst, 3) + " (< 1e-10), " + fmt(secs, 3) +
               " s (< 30 s)";
    return o;
}

// ---- 2 -------------------------------------------------------------------------

Outcome gradient_check() {
    const auto t0 = Clock::now();
    gnn::GnnConfig c;
    c.dims.n_bs = 1;
    c.dims.n_users = 1;
    c.dims.n_targets = 1;
    c.dims.n_tx = 4;
    c.dims.n_rf = 2;
    c.hidden = 8;
    c.embed = 4;
    c.conv_hidden = 4;
    gnn::GnnParams p = gnn::init_params(c, 3);
    testing::generic_biases(p, 3);
    std::vector<gnn::LossSample> batch{{testing::random_channels(c.dims, 30), {}}};
    const ObjectiveSetup setup;
    const auto ps = p.parameters();
    for (auto* q : ps) q->grad = ad::Tensor(q->value.shape());
    gnn::evaluate_loss(p, batch, setup, true);
    const auto loss = [&] { return gnn::evaluate_loss(p, batch, setup, false).loss; };
    double num = 0, den = 0;
    std::size_t n = 0;
    std::size_t silent = 0;
    for (auto* q : ps) {
        double group = 0;
        for (std::size_t k = 0; k < q->value.size(); ++k, ++n) {
            const double fd = testing::central_diff(loss, q->value[k], 1e-6);
            num += (q->grad[k] - fd) * (q->grad[k] - fd);
            den += fd * fd;
            group += fd * fd;
        }
        if (group == 0.0) ++silent;
    }
    const double rel = std::sqrt(num / den);
    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = rel < 1e-4 && secs < 120.0 && silent == 0;
    o.detail = std::to_string(n) + " parameters in " + std::to_string(ps.size()) + " tensors (" +
               std::to_string(silent) + " without gradient), rel err " + fmt(rel, 3) + " (< 1e-4), " + fmt(secs, 3) +
               " s";
    return o;
}

// ---- 3 -------------------------------------------------------------------------

Outcome constraints() {
    const SystemDims d;
    gnn::GnnConfig g;
    g.dims = d;
    std::vector<gnn::GnnParams> models;
    for (std::uint64_t s = 0; s < 4; ++s) models.push_back(gnn::init_params(g, 40 + s));
    double mod = 0, pw = 0;
    int gnn_forwards = 0, baseline_forwards = 0;
    const baselines::BaselineKind kinds[] = {baselines::BaselineKind::Mrt, baselines::BaselineKind::Zf,
                                             baselines::BaselineKind::Mmse};
    const auto check = [&](const BeamformerSet& bf, double power) {
        mod = std::max(mod, max_modulus_error(bf));
        for (std::size_t m = 0; m < bf.n_bs(); ++m)
            pw = std::max(pw, testing::rel_err(bs_power(bf.analog[m], bf.digital[m]), power));
    };
    for (int k = 0; k < 1000; ++k) {
        const ChannelSet ch = testing::random_channels(d, 5000 + static_cast<std::uint64_t>(k), k % 2 ? 3.0 : 0.3);
        const double power = dbm_to_mw(static_cast<double>(k % 7) * 5 - 10);
        check(gnn::forward_values(models[static_cast<std::size_t>(k) % models.size()], ch, power), power);
        ++gnn_forwards;
        ObjectiveSetup setup;
        setup.noise.power = power;
        baselines::BaselineOptions opt;
        opt.centralized = (k / 3) % 2 == 1;
        check(baselines::run_baseline(kinds[k % 3], ch, setup, d.n_rf, opt).beams, power);
        ++baseline_forwards;
    }
    Outcome o;
    o.pass = mod < 1e-12 && pw < 1e-9;
    o.detail = std::to_string(gnn_forwards) + " GNN + " + std::to_string(baseline_forwards) +
               " baseline forwards, max modulus err " + fmt(mod, 3) + " (< 1e-12), max power rel err " + fmt(pw, 3) +
               " (< 1e-9)";
    return o;
}

// ---- 4 -------------------------------------------------------------------------

Outcome convergence(const ExperimentConfig& base) {
    std::vector<double> ratios;
    std::string per;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        ExperimentConfig c = base;
        c.seed = seed;
        const Scenario sc = ex::draw_scenario(c, 0);
        const ex::TrainedModel m = ex::train_model(c, sc, 0);
        if (m.trace.size() < 200) throw std::runtime_error("trace shorter than 200 iterations");
        const double r = m.trace[24].wscsc / m.trace[199].wscsc;
        ratios.push_back(r);
        per += (per.empty() ? "" : ", ") + fmt(r, 4);
    }
    const double med = median(ratios);
    Outcome o;
    o.pass = med >= 0.95;
    o.detail = "WSCSC(25)/WSCSC(200) median " + fmt(med, 4) + " (>= 0.95) over seeds 1-5 [" + per + "]";
    return o;
}

// ---- 5 -------------------------------------------------------------------------

Outcome ordering(const ExperimentConfig& base) {
    ExperimentConfig c = base;
    c.sweep.power_dbm = {base.power.power_dbm};
    c.sweep.draws = 20;
    c.sweep.schemes = {"gnn", "mmse", "zf", "mrt"};
    const ex::SweepResult r = ex::run_sweep(c, ex::SweepVar::Power);
    require_clean(r);
    const auto pts = by_point(r);
    std::map<std::string, double> m;
    for (const auto& s : c.sweep.schemes) m[s] = mean(pts.at({c.sweep.power_dbm[0], s}));
    const double best = std::max({m["mmse"], m["zf"], m["mrt"]});
    Outcome o;
    o.pass = m["gnn"] >= m["mmse"] && m["gnn"] >= m["zf"] && m["gnn"] >= m["mrt"];
    o.detail = "mean WSCSC over 20 draws: gnn " + fmt(m["gnn"]) + ", mmse " + fmt(m["mmse"]) + ", zf " + fmt(m["zf"]) +
               ", mrt " + fmt(m["mrt"]) + "; gnn/best baseline " + fmt(m["gnn"] / best, 4);
    if (m["gnn"] < 1.05 * best)
        o.warnings.push_back("target margin gnn >= 1.05 x best baseline not met (" + fmt(m["gnn"] / best, 4) + ")");
    return o;
}

// ---- 6 -------------------------------------------------------------------------

Outcome monotonicity(const ExperimentConfig& base) {
    std::vector<double> rhos;
    std::string per;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        ExperimentConfig c = base;
        c.seed = seed;
        c.sweep.power_dbm = {-10, -5, 0, 5, 10};
        c.sweep.draws = 1;
        c.sweep.schemes = {"gnn"};
        const ex::SweepResult r = ex::run_sweep(c, ex::SweepVar::Power);
        require_clean(r);
        std::vector<double> x, y;
        for (const auto& row : r.rows) {
            x.push_back(row.value);
            y.push_back(row.eval.wscsc);
        }
        rhos.push_back(spearman(x, y));
        per += (per.empty() ? "" : ", ") + fmt(rhos.back(), 3);
    }
    const double m = mean(rhos);
    Outcome o;
    o.pass = m >= 0.9;
    o.detail = "GNN WSCSC vs P in {-10..10} dBm, mean Spearman " + fmt(m, 4) + " (>= 0.9) [" + per + "]";
    return o;
}

// ---- 7 -------------------------------------------------------------------------

Outcome bs_scaling(const ExperimentConfig& base) {
    ExperimentConfig c = base;
    c.sweep.n_bs = {1, 2, 3};
    c.sweep.draws = 20;
    c.sweep.schemes = {"gnn"};
    const ex::SweepResult r = ex::run_sweep(c, ex::SweepVar::NBs);
    require_clean(r);
    const auto pts = by_point(r);
    std::vector<double> means, ses;
    for (double m : c.sweep.n_bs) {
        const auto& v = pts.at({m, "gnn"});
        means.push_back(mean(v));
        ses.push_back(std_error(v));
    }
    Outcome o;
    o.detail = "mean WSCSC";
    for (std::size_t k = 0; k < means.size(); ++k) {
        o.detail += " M=" + std::to_string(k + 1) + ": " + fmt(means[k]) + " (se " + fmt(ses[k], 3) + ")";
        if (k > 0) {
            const double se = std::sqrt(ses[k] * ses[k] + ses[k - 1] * ses[k - 1]);
            if (means[k] < means[k - 1] - se) o.pass = false;
        }
    }
    return o;
}

// ---- 8 -------------------------------------------------------------------------

Outcome equivariance(const ExperimentConfig& base) {
    gnn::GnnConfig g = base.gnn;
    g.dims = base.scenario.dims;
    const gnn::GnnParams p = gnn::init_params(g, 81);
    const ObjectiveSetup setup = base.objective();
    bool bitwise = true;
    double dw = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const ChannelSet ch = testing::random_channels(g.dims, 8000 + s);
        ChannelSet sw = ch;
        for (std::size_t m = 0; m < sw.n_bs(); ++m) std::swap(sw.com[m][0], sw.com[m][1]);
        const BeamformerSet a = gnn::forward_values(p, ch, setup.noise.power);
        const BeamformerSet b = gnn::forward_values(p, sw, setup.noise.power);
        for (std::size_t m = 0; m < a.n_bs(); ++m) {
            const auto K = a.digital[m].cols();
            for (Eigen::Index k = 0; k < K; ++k) {
                const Eigen::Index k2 = k == 0 ? 1 : (k == 1 ? 0 : k);
                bitwise = bitwise && (a.digital[m].col(k).array() == b.digital[m].col(k2).array()).all();
            }
            bitwise = bitwise && (a.analog[m].array() == b.analog[m].array()).all();
        }
        const double wa = wscsc(ch, a, setup.weights, setup.noise, setup.receive).wscsc;
        const double wb = wscsc(sw, b, setup.weights, setup.noise, setup.receive).wscsc;
        dw = std::max(dw, std::abs(wa - wb));
    }
    Outcome o;
    o.pass = bitwise && dw < 1e-9;
    o.detail = std::string("10 instances, digital columns swap ") + (bitwise ? "bitwise" : "NOT bitwise") +
               ", max |dWSCSC| " + fmt(dw, 3) + " (< 1e-9)";
    return o;
}

// ---- 9 -------------------------------------------------------------------------

Outcome imperfect_csi(const ExperimentConfig& base) {
    const int draws = 5;
    ExperimentConfig c = base;
    c.sweep.csi = {0.0, 0.01};
    c.sweep.csi_model = "gaussian";
    c.sweep.draws = draws;
    c.sweep.schemes = {"gnn"};
    const ex::SweepResult r = ex::run_sweep(c, ex::SweepVar::Csi);
    require_clean(r);
    ExperimentConfig perfect = base;
    perfect.csi.spec.model = CsiErrorModel::None;
    perfect.sweep.power_dbm = {base.power.power_dbm};
    perfect.sweep.draws = draws;
    perfect.sweep.schemes = {"gnn"};
    const ex::SweepResult p = ex::run_sweep(perfect, ex::SweepVar::Power);
    require_clean(p);
    bool exact = true;
    std::vector<double> zero, err, ref;
    for (const auto& row : r.rows) (row.value == 0.0 ? zero : err).push_back(row.eval.wscsc);
    for (const auto& row : p.rows) ref.push_back(row.eval.wscsc);
    exact = zero == ref;
    const double retained = mean(err) / mean(ref);
    Outcome o;
    o.pass = exact;
    o.detail = std::string("sigma2=0 ") + (exact ? "reproduces" : "DOES NOT reproduce") + " perfect-CSI WSCSC exactly (" +
               std::to_string(draws) + " draws); sigma2=0.01 retains " + fmt(100 * retained, 4) + "% (soft >= 80%)";
    if (retained < 0.8) o.warnings.push_back("sigma2=0.01 retention " + fmt(100 * retained, 4) + "% < 80%");
    return o;
}

// ---- 10 ------------------------------------------------------------------------

Outcome fixed_point(const ExperimentConfig& base) {
    Outcome o;
    // quantization bound on every weight tensor of a trained model
    const Scenario sc0 = ex::draw_scenario(base, 0);
    const ex::TrainedModel trained = ex::train_model(base, sc0, 0);
    gnn::GnnParams params = trained.params;
    double worst_ratio = 0;
    for (auto* q : params.parameters())
        for (int bits : {4, 8, 16}) {
            const fpga::QuantizedTensor t = fpga::calibrate_and_quantize(q->value, bits);
            const ad::Tensor back = t.dequantize();
            for (std::size_t k = 0; k < back.size(); ++k)
                worst_ratio = std::max(worst_ratio, std::abs(back[k] - q->value[k]) / t.format.scale);
        }
    const bool quant_ok = worst_ratio <= 0.5 * (1 + 1e-12);

    // accuracy across bit widths, median over 50 draws
    ExperimentConfig c = base;
    c.csi.spec.model = CsiErrorModel::None;
    std::map<int, std::vector<double>> deltas;
    for (std::uint64_t d = 0; d < 50; ++d) {
        const Scenario sc = ex::draw_scenario(c, 1000 + d);
        for (int bits : {4, 8, 16}) {
            fpga::EmulatorOptions opt;
            opt.bits = bits;
            deltas[bits].push_back(fpga::fused_inference(params, sc.channels, c.objective(), opt).relative_delta);
        }
    }
    const double m4 = median(deltas[4]), m8 = median(deltas[8]), m16 = median(deltas[16]);
    const bool acc_ok = m16 < 0.01;
    const bool mono_ok = m4 >= m8 && m8 >= m16;

    // latency model on the default profile
    const auto layers = fpga::network_layers(base.gnn, base.scenario.dims.n_users, base.scenario.dims.n_targets);
    fpga::AcceleratorConfig a = base.latency.accelerator;
    bool bus_ok = true;
    std::string lat;
    for (int bits : {8, 16}) {
        a.bus_bits = 64;
        const auto r64 = fpga::latency_estimate(layers, a, bits);
        a.bus_bits = 128;
        const auto r128 = fpga::latency_estimate(layers, a, bits);
        bus_ok = bus_ok && r128.total_cycles < r64.total_cycles;
        lat += " " + std::to_string(bits) + "-bit: " + std::to_string(r64.total_cycles) + " -> " +
               std::to_string(r128.total_cycles) + " cycles;";
    }
    a.bus_bits = 64;
    const auto def = fpga::latency_estimate(layers, a, 16);

    o.pass = quant_ok && acc_ok && mono_ok && bus_ok;
    o.detail = "quant err/scale max " + fmt(worst_ratio, 4) + " (<= 0.5); median rel WSCSC delta 4/8/16-bit " + fmt(m4, 3) +
               " / " + fmt(m8, 3) + " / " + fmt(m16, 3) + " (16-bit < 0.01, non-increasing); bus 64 -> 128:" + lat +
               " default 16-bit/64-bit-bus total " + std::to_string(def.total_cycles) + " cycles = " +
               fmt(def.total_ms, 4) + " ms (reference band 432638-658873 cycles, informational)";
    return o;
}

// ---- 11 ------------------------------------------------------------------------

Outcome determinism(const ExperimentConfig& base, const fs::path& out) {
    ExperimentConfig c = base;
    c.sweep.draws = 3;
    std::ostringstream log;
    const fs::path a = out / "determinism_a", b = out / "determinism_b";
    fs::remove_all(a);
    fs::remove_all(b);
    const int ra = ex::command_sweep(c, ex::SweepVar::Power, a, log);
    const int rb = ex::command_sweep(c, ex::SweepVar::Power, b, log);
    const std::string ca = ex::read_text(a / "sweep" / "sweep_power.csv");
    const std::string cb = ex::read_text(b / "sweep" / "sweep_power.csv");
    const auto lines = std::count(ca.begin(), ca.end(), '\n') - 1;
    Outcome o;
    o.pass = ra == 0 && rb == 0 && ca == cb && !ca.empty();
    o.detail = "two sweep --var power runs (" + std::to_string(c.sweep.power_dbm.size()) + " points x " +
               std::to_string(c.sweep.draws) + " draws x " + std::to_string(c.sweep.schemes.size()) + " schemes = " +
               std::to_string(lines) + " rows): CSVs " + (ca == cb ? "byte-identical" : "DIFFER");
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"isaclab acceptance suite"};
    std::string out = "acceptance_out";
    std::string config_path;
    std::set<int> only;
    app.add_option("--out", out, "scratch and report directory");
    app.add_option("--config", config_path, "base configuration (defaults when omitted)");
    app.add_option("--only", only, "run only these criteria");
    CLI11_PARSE(app, argc, argv);

    ExperimentConfig base;
    try {
        base = config_path.empty() ? parse_config("") : load_config(config_path);
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }
    base.gnn.dims = base.scenario.dims;
    fs::create_directories(out);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"sinr-oracle", sinr_oracle},
        {"gradient", gradient_check},
        {"constraints", constraints},
        {"convergence", [&] { return convergence(base); }},
        {"benchmark-ordering", [&] { return ordering(base); }},
        {"power-monotonicity", [&] { return monotonicity(base); }},
        {"bs-scaling", [&] { return bs_scaling(base); }},
        {"permutation-equivariance", [&] { return equivariance(base); }},
        {"imperfect-csi", [&] { return imperfect_csi(base); }},
        {"fixed-point", [&] { return fixed_point(base); }},
        {"determinism", [&] { return determinism(base, out); }},
    };

    nlohmann::ordered_json report = nlohmann::ordered_json::array();
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k + 1);
        if (!only.empty() && !only.count(id)) continue;
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("error: ") + e.what();
        }
        const double secs = seconds_since(t0);
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << id << " " << criteria[k].first << ": " << o.detail << " ["
                  << fmt(secs, 3) << " s]" << std::endl;
        for (const auto& w : o.warnings) std::cout << "WARN  " << id << " " << criteria[k].first << ": " << w << std::endl;
        report.push_back({{"criterion", id},
                          {"name", criteria[k].first},
                          {"pass", o.pass},
                          {"detail", o.detail},
                          {"warnings", o.warnings},
                          {"seconds", secs}});
    }
    ex::write_text(fs::path(out) / "acceptance.json", report.dump(2) + "\n");
    std::cout << (failed ? std::to_string(failed) + " criterion/criteria failed" : std::string("all criteria passed"))
              << std::endl;
    return failed ? 1 : 0;
}
