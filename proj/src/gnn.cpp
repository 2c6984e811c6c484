#include "isaclab/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "isaclab/errors.hpp"
#include "isaclab/rng.hpp"

namespace isac::gnn {

using ad::CVar;
using ad::Parameter;
using ad::Tape;
using ad::Tensor;
using ad::Var;

void GnnConfig::validate() const {
    dims.validate();
    if (hidden < 1 || embed < 1 || conv_hidden < 1) throw ConfigError("gnn: layer widths must be >= 1");
    if (conv_layers < 0) throw ConfigError("gnn: conv_layers must be >= 0");
    if (!(analog_init_scale >= 0.0) || !std::isfinite(analog_init_scale))
        throw ConfigError("gnn: analog_init_scale must be finite and >= 0");
}

namespace {

Linear make_linear(const std::string& name, int in, int out, RngStream rng) {
    Linear l;
    Tensor w({static_cast<std::size_t>(in), static_cast<std::size_t>(out)});
    const double bound = std::sqrt(6.0 / static_cast<double>(in));
    for (double& v : w.data()) v = rng.uniform(-bound, bound);
    l.weight = Parameter(name + ".weight", std::move(w));
    l.bias = Parameter(name + ".bias", Tensor({1, static_cast<std::size_t>(out)}));
    return l;
}

Mlp make_mlp(const std::string& name, std::initializer_list<int> widths, const RngStream& rng) {
    Mlp mlp;
    const std::vector<int> w(widths);
    for (std::size_t k = 0; k + 1 < w.size(); ++k)
        mlp.layers.push_back(make_linear(name + "." + std::to_string(k), w[k], w[k + 1], rng.fork(k)));
    return mlp;
}

BsNetwork make_network(const GnnConfig& c, const RngStream& rng) {
    BsNetwork net;
    net.com = make_mlp("com", {c.com_input(), c.hidden, c.embed}, rng.fork(1));
    net.sen = make_mlp("sen", {c.sen_input(), c.hidden, c.embed}, rng.fork(2));
    for (int l = 0; l < c.conv_layers; ++l) {
        const std::string p = "conv" + std::to_string(l);
        const RngStream r = rng.fork(10 + static_cast<std::uint64_t>(l));
        ConvLayer layer;
        layer.neighbor = make_mlp(p + ".neighbor", {c.embed, c.conv_hidden, c.embed}, r.fork(0));
        layer.combine = make_mlp(p + ".combine", {2 * c.embed, c.conv_hidden, c.embed}, r.fork(1));
        net.conv.push_back(std::move(layer));
    }
    net.digital = make_linear("head.digital", c.embed, c.digital_output(), rng.fork(3));
    net.analog = make_linear("head.analog", c.embed, c.analog_output(), rng.fork(4));
    for (double& v : net.analog.weight.value.data()) v *= c.analog_init_scale;
    if (c.analog_bias_uniform) {
        RngStream br = rng.fork(5);
        for (double& v : net.analog.bias.value.data()) v = br.uniform(-std::numbers::pi, std::numbers::pi);
    }
    return net;
}

void collect(Mlp& mlp, std::vector<Parameter*>& out) {
    for (auto& l : mlp.layers) {
        out.push_back(&l.weight);
        out.push_back(&l.bias);
    }
}

Var bind(Tape& tape, Parameter& p) { return tape.parameter(p); }

double sorted_sum_squares(std::vector<double> v) {
    for (double& x : v) x *= x;
    std::sort(v.begin(), v.end());
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

}  // namespace

std::vector<Parameter*> BsNetwork::parameters() {
    std::vector<Parameter*> out;
    collect(com, out);
    collect(sen, out);
    for (auto& c : conv) {
        collect(c.neighbor, out);
        collect(c.combine, out);
    }
    out.push_back(&digital.weight);
    out.push_back(&digital.bias);
    out.push_back(&analog.weight);
    out.push_back(&analog.bias);
    return out;
}

std::size_t BsNetwork::parameter_count() const {
    std::size_t n = 0;
    for (auto* p : const_cast<BsNetwork*>(this)->parameters()) n += p->value.size();
    return n;
}

std::vector<Parameter*> GnnParams::parameters() {
    std::vector<Parameter*> out;
    for (auto& net : networks) {
        auto p = net.parameters();
        out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

std::size_t GnnParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& net : networks) n += net.parameter_count();
    return n;
}

GnnParams init_params(const GnnConfig& config, std::uint64_t seed) {
    config.validate();
    GnnParams p;
    p.config = config;
    p.seed = seed;
    const std::size_t count = config.shared_weights ? 1 : static_cast<std::size_t>(config.dims.n_bs);
    const RngStream root(seed, {0x676e6e});
    for (std::size_t m = 0; m < count; ++m) p.networks.push_back(make_network(config, root.fork(m)));
    return p;
}

// ---- stages ------------------------------------------------------------------

namespace {

Tensor flatten_rows(const std::vector<CMatrix>& mats) {
    const auto r = static_cast<std::size_t>(mats[0].rows());
    const auto c = static_cast<std::size_t>(mats[0].cols());
    Tensor out({mats.size(), 2 * r * c});
    for (std::size_t k = 0; k < mats.size(); ++k) {
        if (static_cast<std::size_t>(mats[k].rows()) != r || static_cast<std::size_t>(mats[k].cols()) != c)
            throw DimensionError("channel matrices of one kind must share a shape");
        double* row = out.data().data() + k * 2 * r * c;
        for (std::size_t a = 0; a < r; ++a) {
            for (std::size_t b = 0; b < c; ++b) {
                const cd v = mats[k](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
                row[a * 2 * c + b] = v.real();
                row[a * 2 * c + c + b] = v.imag();
            }
        }
    }
    return out;
}

void rms_normalize(Tensor& t) {
    const std::vector<double> v(t.data().begin(), t.data().end());
    const double rms = std::sqrt(sorted_sum_squares(v) / static_cast<double>(v.size()));
    if (rms > 0.0 && std::isfinite(rms))
        for (double& x : t.data()) x /= rms;
}

}  // namespace

NodeFeatures build_node_features(const ChannelSet& ch, std::size_t m, bool normalize) {
    if (m >= ch.n_bs()) throw PreconditionError("BS index out of range");
    NodeFeatures f;
    f.n_users = ch.n_users();
    f.n_targets = ch.n_targets();
    if (f.n_users > 0) {
        f.com = flatten_rows(ch.com[m]);
        if (normalize) rms_normalize(f.com);
    }
    if (f.n_targets > 0) {
        f.sen = flatten_rows(ch.sen[m]);
        if (normalize) rms_normalize(f.sen);
    }
    return f;
}

CMatrix unflatten_row(std::span<const double> row, int rows, int cols) {
    if (row.size() != static_cast<std::size_t>(2 * rows * cols)) throw DimensionError("feature row length mismatch");
    CMatrix h(rows, cols);
    for (int a = 0; a < rows; ++a)
        for (int b = 0; b < cols; ++b)
            h(a, b) = cd(row[static_cast<std::size_t>(a * 2 * cols + b)],
                         row[static_cast<std::size_t>(a * 2 * cols + cols + b)]);
    return h;
}

Var linear_forward(Tape& tape, Linear& layer, Var x) {
    return ad::add(ad::matmul(x, bind(tape, layer.weight)), bind(tape, layer.bias));
}

Var mlp_forward(Tape& tape, Mlp& mlp, Var x, bool relu_last) {
    for (std::size_t k = 0; k < mlp.layers.size(); ++k) {
        x = linear_forward(tape, mlp.layers[k], x);
        if (relu_last || k + 1 < mlp.layers.size()) x = ad::relu(x);
    }
    return x;
}

Var embed(Tape& tape, BsNetwork& net, const NodeFeatures& f) {
    std::vector<Var> parts;
    if (f.n_users > 0) {
        if (f.com.cols() != net.com.layers.front().weight.value.rows())
            throw DimensionError("com feature width " + std::to_string(f.com.cols()) + " does not match the network");
        parts.push_back(mlp_forward(tape, net.com, tape.constant(f.com)));
    }
    if (f.n_targets > 0) {
        if (f.sen.cols() != net.sen.layers.front().weight.value.rows())
            throw DimensionError("sen feature width " + std::to_string(f.sen.cols()) + " does not match the network");
        parts.push_back(mlp_forward(tape, net.sen, tape.constant(f.sen)));
    }
    if (parts.empty()) throw PreconditionError("embed needs at least one user or target");
    return parts.size() == 1 ? parts[0] : ad::concat_rows(parts);
}

Var append_mean_node(const Var& z) {
    const Var parts[2] = {z, ad::mean_rows(z)};
    return ad::concat_rows(parts);
}

Var graph_conv(Tape& tape, ConvLayer& layer, const Var& z) {
    const std::size_t n = z.rows();
    if (n < 2) throw PreconditionError("graph_conv needs at least two nodes");
    const Var zn = mlp_forward(tape, layer.neighbor, z);
    std::vector<Var> rows;
    for (std::size_t k = 0; k < n; ++k) rows.push_back(ad::slice_rows(zn, k, 1));
    std::vector<Var> agg;
    std::vector<Var> others;
    for (std::size_t k = 0; k < n; ++k) {
        others.clear();
        for (std::size_t q = 0; q < n; ++q)
            if (q != k) others.push_back(rows[q]);
        agg.push_back(ad::max_over_set(others));
    }
    const Var cat[2] = {z, ad::concat_rows(agg)};
    return mlp_forward(tape, layer.combine, ad::concat_cols(cat));
}

HeadOutputs output_heads(Tape& tape, BsNetwork& net, const Var& z) {
    const std::size_t n = z.rows();
    if (n < 2) throw PreconditionError("output_heads needs the node rows plus the mean row");
    HeadOutputs h;
    h.digital = linear_forward(tape, net.digital, ad::slice_rows(z, 0, n - 1));
    h.analog = linear_forward(tape, net.analog, ad::slice_rows(z, n - 1, 1));
    return h;
}

CVar normalize_analog(const Var& raw, int n_tx, int n_rf) {
    if (raw.size() != static_cast<std::size_t>(n_tx * n_rf))
        throw DimensionError("analog head width " + std::to_string(raw.size()) + " != N_t * N");
    return ad::phase_to_unit(ad::reshape(raw, {static_cast<std::size_t>(n_tx), static_cast<std::size_t>(n_rf)}));
}

DigitalOutput normalize_digital(Tape& tape, const Var& raw, const CVar& analog, double power) {
    const std::size_t n = raw.cols() / 2;
    if (raw.cols() != 2 * n || n != analog.cols())
        throw DimensionError("digital head width " + std::to_string(raw.cols()) + " != 2N");
    DigitalOutput out;
    out.w = CVar{ad::transpose(ad::slice_cols(raw, 0, n)), ad::transpose(ad::slice_cols(raw, n, n))};
    const Var p = bs_power(analog, out.w);
    const double pv = p.value().item();
    if (!(pv > 0.0) || !std::isfinite(pv)) {
        out.degenerate = true;
        out.w = ad::constant(tape, CMatrix(CMatrix::Zero(static_cast<Eigen::Index>(n),
                                                         static_cast<Eigen::Index>(raw.rows()))));
        return out;
    }
    out.w = ad::cscale(out.w, ad::sqrt(ad::scale(ad::reciprocal(p), power)));
    return out;
}

ForwardResult forward(Tape& tape, GnnParams& params, const ChannelSet& ch, double power) {
    const GnnConfig& c = params.config;
    const std::size_t M = ch.n_bs();
    if (!c.shared_weights && M != params.networks.size())
        throw DimensionError("channel set has " + std::to_string(M) + " BSs but the model has " +
                             std::to_string(params.networks.size()) + " networks");
    if (ch.n_users() + ch.n_targets() > static_cast<std::size_t>(c.dims.n_rf))
        throw PreconditionError("I + J exceeds the RF chain count N");
    ForwardResult r;
    for (std::size_t m = 0; m < M; ++m) {
        BsNetwork& net = params.network(m);
        Var z = append_mean_node(embed(tape, net, build_node_features(ch, m, c.normalize_inputs)));
        for (auto& layer : net.conv) z = graph_conv(tape, layer, z);
        const HeadOutputs h = output_heads(tape, net, z);
        const CVar f = normalize_analog(h.analog, c.dims.n_tx, c.dims.n_rf);
        const DigitalOutput d = normalize_digital(tape, h.digital, f, power);
        r.beams.analog.push_back(f);
        r.beams.digital.push_back(d.w);
        r.degenerate.push_back(d.degenerate);
    }
    return r;
}

BeamformerSet forward_values(const GnnParams& params, const ChannelSet& ch, double power) {
    Tape tape(false);
    // A non-recording tape only reads parameter values.
    return values(forward(tape, const_cast<GnnParams&>(params), ch, power).beams);
}

// ---- loss and training -------------------------------------------------------

LossReport evaluate_loss(GnnParams& params, std::span<const LossSample> batch, const ObjectiveSetup& setup,
                         bool accumulate_grad) {
    if (batch.empty()) throw PreconditionError("loss needs at least one sample");
    const double T = static_cast<double>(batch.size());
    LossReport rep;
    for (std::size_t t = 0; t < batch.size(); ++t) {
        const LossSample& s = batch[t];
        Tape tape(accumulate_grad);
        const ForwardResult fr = forward(tape, params, s.channels, setup.noise.power);
        rep.degenerate += static_cast<std::size_t>(std::count(fr.degenerate.begin(), fr.degenerate.end(), true));
        Var obj;
        double scc = 0.0, ssc = 0.0;
        if (s.draws.empty()) {
            const ObjectiveTerms terms = wscsc_terms(tape, s.channels, fr.beams, setup.weights, setup.noise, setup.receive);
            obj = terms.wscsc;
            scc = terms.scc.value().item();
            ssc = terms.ssc.value().item();
        } else {
            const double D = static_cast<double>(s.draws.size());
            std::vector<Var> parts;
            for (const auto& draw : s.draws) {
                const ObjectiveTerms terms = wscsc_terms_imperfect(tape, draw, fr.beams, setup.weights, setup.noise,
                                                                   setup.receive, setup.eta_in_sensing);
                parts.push_back(terms.wscsc);
                scc += terms.scc.value().item() / D;
                ssc += terms.ssc.value().item() / D;
            }
            obj = parts[0];
            for (std::size_t d = 1; d < parts.size(); ++d) obj = obj + parts[d];
            obj = ad::scale(obj, 1.0 / D);
        }
        const double v = obj.value().item();
        if (!std::isfinite(v)) throw TrainingError("non-finite WSCSC at sample " + std::to_string(t));
        rep.wscsc += v / T;
        rep.scc += scc / T;
        rep.ssc += ssc / T;
        if (accumulate_grad) tape.backward(obj, -1.0 / T);
    }
    rep.loss = -rep.wscsc;
    return rep;
}

TrainMode parse_train_mode(const std::string& name) {
    if (name == "scenario") return TrainMode::Scenario;
    if (name == "distribution") return TrainMode::Distribution;
    throw ConfigError("unknown training mode '" + name + "' (expected scenario or distribution)");
}

std::string to_string(TrainMode mode) { return mode == TrainMode::Scenario ? "scenario" : "distribution"; }

void TrainConfig::validate() const {
    if (iterations < 0) throw ConfigError("train.iterations must be >= 0");
    if (samples_per_iteration < 1) throw ConfigError("train.samples_per_iteration must be >= 1");
    if (steps_per_epoch < 1) throw ConfigError("train.steps_per_epoch must be >= 1");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ConfigError("train.learning_rate must be >= 0");
    if (error_draws < 1) throw ConfigError("train.error_draws must be >= 1");
    if (warmup < 0) throw ConfigError("train.warmup must be >= 0");
    if (!(final_lr_fraction >= 0.0 && final_lr_fraction <= 1.0))
        throw ConfigError("train.final_lr_fraction must lie in [0, 1]");
    csi.validate();
}

double TrainConfig::rate_at(int step) const {
    if (step < warmup) return learning_rate * static_cast<double>(step + 1) / static_cast<double>(warmup);
    const int span = iterations - warmup;
    if (span <= 1 || final_lr_fraction == 1.0) return learning_rate;
    const double progress = static_cast<double>(step - warmup) / static_cast<double>(span - 1);
    const double cosine = 0.5 * (1.0 + std::cos(std::acos(-1.0) * progress));
    return learning_rate * (final_lr_fraction + (1.0 - final_lr_fraction) * cosine);
}

TrainResult train(GnnParams& params, const TrainConfig& cfg, const ObjectiveSetup& setup, const ChannelSampler& sampler) {
    cfg.validate();
    setup.weights.validate();
    setup.noise.validate();
    ad::Optimizer opt(cfg.optimizer, cfg.learning_rate);
    const RngStream err_root(cfg.seed, {0x637369});
    const auto ps = params.parameters();
    TrainResult result;
    std::vector<LossSample> batch(static_cast<std::size_t>(cfg.samples_per_iteration));
    for (int it = 0; it < cfg.iterations; ++it) {
        for (std::size_t t = 0; t < batch.size(); ++t) {
            batch[t].channels = sampler(static_cast<std::size_t>(it), t);
            batch[t].draws.clear();
            if (cfg.csi.model != CsiErrorModel::None) {
                const RngStream base = err_root.fork(static_cast<std::uint64_t>(it)).fork(t);
                for (int d = 0; d < cfg.error_draws; ++d) {
                    RngStream r = base.fork(static_cast<std::uint64_t>(d));
                    batch[t].draws.push_back(sample_error_around(batch[t].channels, cfg.csi, r));
                }
            }
        }
        opt.set_learning_rate(cfg.rate_at(it));
        LossReport rep;
        try {
            rep = evaluate_loss(params, batch, setup, true);
            opt.step(ps);
        } catch (const TrainingError& e) {
            std::ostringstream msg;
            msg << e.what() << " at iteration " << it + 1 << "; trace so far:";
            for (const auto& row : result.trace) msg << ' ' << row.wscsc;
            throw TrainingError(msg.str());
        }
        TraceRow row;
        row.iteration = it + 1;
        row.epoch = it / cfg.steps_per_epoch + 1;
        row.learning_rate = cfg.rate_at(it);
        row.loss = rep.loss;
        row.wscsc = rep.wscsc;
        row.scc = rep.scc;
        row.ssc = rep.ssc;
        result.trace.push_back(row);
    }
    return result;
}

InferResult infer(const GnnParams& params, const ChannelSet& ch, const ObjectiveSetup& setup) {
    InferResult r;
    r.beams = forward_values(params, ch, setup.noise.power);
    r.report = wscsc(ch, r.beams, setup.weights, setup.noise, setup.receive);
    return r;
}

}  // namespace isac::gnn
