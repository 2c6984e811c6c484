#include "isaclab/fixed_point.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "isaclab/errors.hpp"

namespace isac::fpga {

using ad::Tensor;

int FixedPointFormat::frac_bits() const {
    if (!(scale > 0.0)) return 0;
    const int f = static_cast<int>(std::floor(-std::log2(scale)));
    return std::clamp(f, 0, bits - 1);
}

void FixedPointFormat::validate() const {
    if (bits < 2 || bits > 32) throw ConfigError("fixed-point bits must lie in [2, 32]");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw ConfigError("fixed-point scale must be positive and finite");
}

Tensor QuantizedTensor::dequantize() const {
    Tensor t(shape);
    auto d = t.data();
    for (std::size_t k = 0; k < values.size(); ++k) d[k] = static_cast<double>(values[k]) * format.scale;
    return t;
}

std::int64_t round_even(double x) { return static_cast<std::int64_t>(std::nearbyint(x)); }

namespace {

// round(num / den) with ties to even, den > 0.
std::int64_t div_round_even(__int128 num, __int128 den) {
    __int128 q = num / den;
    __int128 r = num % den;
    if (r < 0) {
        r += den;
        q -= 1;
    }
    const __int128 twice = 2 * r;
    if (twice > den || (twice == den && (q & 1) != 0)) q += 1;
    return static_cast<std::int64_t>(q);
}

int bit_length(std::uint64_t v) { return v == 0 ? 0 : 64 - std::countl_zero(v); }

std::int64_t acc_limit(int bits) {
    return bits >= 64 ? INT64_MAX : (std::int64_t{1} << (bits - 1)) - 1;
}

}  // namespace

QuantizedTensor quantize_with_scale(const Tensor& t, int bits, double scale) {
    QuantizedTensor q;
    q.shape = t.shape();
    q.format.bits = bits;
    q.format.scale = scale;
    q.format.validate();
    if (!t.all_finite()) throw PreconditionError("cannot quantize a tensor with non-finite entries");
    const std::int64_t lim = q.format.qmax();
    q.values.resize(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) {
        std::int64_t v = round_even(t[k] / scale);
        if (v > lim || v < -lim) {
            v = std::clamp(v, -lim, lim);
            ++q.clamped;
        }
        q.values[k] = v;
    }
    return q;
}

QuantizedTensor calibrate_and_quantize(const Tensor& t, int bits) {
    double mx = 0.0;
    for (double v : t.data()) mx = std::max(mx, std::abs(v));
    FixedPointFormat f;
    f.bits = bits;
    const double scale = mx > 0.0 ? mx / static_cast<double>(f.qmax()) : 1.0;
    return quantize_with_scale(t, bits, scale);
}

int required_accumulator_bits(std::size_t k, int bits_a, int bits_b) {
    const unsigned __int128 qa = (std::uint64_t{1} << (bits_a - 1)) - 1;
    const unsigned __int128 qb = (std::uint64_t{1} << (bits_b - 1)) - 1;
    const unsigned __int128 worst = static_cast<unsigned __int128>(k) * qa * qb;
    const auto hi = static_cast<std::uint64_t>(worst >> 64);
    const int len = hi ? 64 + bit_length(hi) : bit_length(static_cast<std::uint64_t>(worst));
    return len + 1;
}

IntMatmulResult integer_matmul(const QuantizedTensor& a, const QuantizedTensor& b, const AccumulatorPolicy& acc) {
    const std::size_t r = a.rows(), k = a.cols(), c = b.cols();
    if (b.rows() != k)
        throw DimensionError("fixed-point matmul shape mismatch: " + ad::shape_string(a.shape) + " x " +
                             ad::shape_string(b.shape));
    IntMatmulResult out;
    out.rows = r;
    out.cols = c;
    const int need = required_accumulator_bits(k, a.format.bits, b.format.bits);
    out.accumulator_bits = std::max(acc.bits, 32);
    if (need > out.accumulator_bits) {
        if (!acc.auto_widen)
            throw EmulationError("accumulator overflow risk: k=" + std::to_string(k) + " needs " + std::to_string(need) +
                                 " bits, accumulator has " + std::to_string(out.accumulator_bits));
        out.accumulator_bits = need;
    }
    if (out.accumulator_bits > 64) throw EmulationError("accumulator would need more than 64 bits");
    out.acc.assign(r * c, 0);
    for (std::size_t i = 0; i < r; ++i) {
        std::int64_t* orow = out.acc.data() + i * c;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const std::int64_t av = a.values[i * k + kk];
            if (av == 0) continue;
            const std::int64_t* brow = b.values.data() + kk * c;
            for (std::size_t j = 0; j < c; ++j) orow[j] += av * brow[j];
        }
    }
    return out;
}

QuantizedTensor requantize(const IntMatmulResult& r, double acc_scale, int bits) {
    QuantizedTensor q;
    q.shape = {r.rows, r.cols};
    q.format.bits = bits;
    q.values.resize(r.acc.size());
    std::int64_t mx = 0;
    for (auto v : r.acc) mx = std::max(mx, v < 0 ? -v : v);
    if (mx == 0) {
        q.format.scale = 1.0;
        return q;
    }
    const std::int64_t qmax = q.format.qmax();
    for (std::size_t k = 0; k < r.acc.size(); ++k)
        q.values[k] = div_round_even(static_cast<__int128>(r.acc[k]) * qmax, mx);
    q.format.scale = acc_scale * (static_cast<double>(mx) / static_cast<double>(qmax));
    return q;
}

QuantizedTensor fixed_point_matmul(const QuantizedTensor& a, const QuantizedTensor& b, int out_bits,
                                   const AccumulatorPolicy& acc) {
    return requantize(integer_matmul(a, b, acc), a.format.scale * b.format.scale, out_bits);
}

// ---- whole-network emulation ---------------------------------------------------

namespace {

class Emulator {
public:
    Emulator(const EmulatorOptions& o, FixedPointResult& out) : opt_(o), out_(out) {}

    QuantizedTensor input(const Tensor& t, const std::string& name) {
        QuantizedTensor q = calibrate_and_quantize(t, opt_.bits);
        out_.clamped += q.clamped;
        return stage(std::move(q), name);
    }

    QuantizedTensor linear(const QuantizedTensor& x, const gnn::Linear& layer, bool relu, const std::string& name) {
        const QuantizedTensor w = calibrate_and_quantize(layer.weight.value, opt_.bits);
        IntMatmulResult acc = integer_matmul(x, w, opt_.accumulator);
        const double acc_scale = x.format.scale * w.format.scale;
        const auto& bias = layer.bias.value;
        double bias_max = 0.0;
        for (double b : bias.data()) bias_max = std::max(bias_max, std::abs(std::nearbyint(b / acc_scale)));
        std::int64_t acc_max = 0;
        for (auto v : acc.acc) acc_max = std::max(acc_max, v < 0 ? -v : v);
        const double worst = bias_max + static_cast<double>(acc_max);
        if (worst > static_cast<double>(acc_limit(acc.accumulator_bits))) {
            const int need = static_cast<int>(std::ceil(std::log2(worst + 1.0))) + 1;
            if (!opt_.accumulator.auto_widen || need > 63)
                throw EmulationError(name + ": bias does not fit the " + std::to_string(acc.accumulator_bits) +
                                     "-bit accumulator (needs " + std::to_string(need) + ")");
            acc.accumulator_bits = need;
        }
        const std::int64_t lim = acc_limit(acc.accumulator_bits);
        for (std::size_t i = 0; i < acc.rows; ++i) {
            for (std::size_t j = 0; j < acc.cols; ++j) {
                std::int64_t& a = acc.acc[i * acc.cols + j];
                const double bq = std::nearbyint(bias[j] / acc_scale);
                if (std::abs(bq) > static_cast<double>(lim))
                    throw EmulationError(name + ": bias does not fit the accumulator");
                a += static_cast<std::int64_t>(bq);
                if (a > lim || a < -lim) throw EmulationError(name + ": accumulator overflow after bias");
                if (relu && a < 0) a = 0;
            }
        }
        return stage(requantize(acc, acc_scale, opt_.bits), name);
    }

    QuantizedTensor mlp(QuantizedTensor x, const gnn::Mlp& mlp, const std::string& name) {
        for (std::size_t k = 0; k < mlp.layers.size(); ++k)
            x = linear(x, mlp.layers[k], true, name + "." + std::to_string(k));
        return x;
    }

    // Brings both operands to the coarser of their two scales.
    std::pair<QuantizedTensor, QuantizedTensor> common_scale(QuantizedTensor a, QuantizedTensor b) {
        if (a.format.scale == b.format.scale) return {std::move(a), std::move(b)};
        QuantizedTensor& fine = a.format.scale < b.format.scale ? a : b;
        const double coarse = std::max(a.format.scale, b.format.scale);
        const double ratio = fine.format.scale / coarse;
        for (auto& v : fine.values) v = round_even(static_cast<double>(v) * ratio);
        fine.format.scale = coarse;
        return {std::move(a), std::move(b)};
    }

    QuantizedTensor concat_rows(QuantizedTensor a, QuantizedTensor b, const std::string& name) {
        if (a.cols() != b.cols()) throw DimensionError("concat_rows width mismatch");
        auto [x, y] = common_scale(std::move(a), std::move(b));
        x.values.insert(x.values.end(), y.values.begin(), y.values.end());
        x.shape = {x.rows() + y.rows(), x.cols()};
        return stage(std::move(x), name);
    }

    QuantizedTensor concat_cols(QuantizedTensor a, QuantizedTensor b, const std::string& name) {
        if (a.rows() != b.rows()) throw DimensionError("concat_cols height mismatch");
        auto [x, y] = common_scale(std::move(a), std::move(b));
        const std::size_t r = x.rows(), cx = x.cols(), cy = y.cols();
        QuantizedTensor out;
        out.format = x.format;
        out.shape = {r, cx + cy};
        out.values.reserve(r * (cx + cy));
        for (std::size_t i = 0; i < r; ++i) {
            out.values.insert(out.values.end(), x.values.begin() + static_cast<std::ptrdiff_t>(i * cx),
                              x.values.begin() + static_cast<std::ptrdiff_t>((i + 1) * cx));
            out.values.insert(out.values.end(), y.values.begin() + static_cast<std::ptrdiff_t>(i * cy),
                              y.values.begin() + static_cast<std::ptrdiff_t>((i + 1) * cy));
        }
        return stage(std::move(out), name);
    }

    QuantizedTensor append_mean(QuantizedTensor z, const std::string& name) {
        const std::size_t r = z.rows(), c = z.cols();
        for (std::size_t j = 0; j < c; ++j) {
            __int128 s = 0;
            for (std::size_t i = 0; i < r; ++i) s += z.values[i * c + j];
            z.values.push_back(div_round_even(s, static_cast<__int128>(r)));
        }
        z.shape = {r + 1, c};
        return stage(std::move(z), name);
    }

    QuantizedTensor max_others(const QuantizedTensor& zn, const std::string& name) {
        const std::size_t r = zn.rows(), c = zn.cols();
        if (r < 2) throw PreconditionError("graph_conv needs at least two nodes");
        QuantizedTensor out;
        out.format = zn.format;
        out.shape = {r, c};
        out.values.assign(r * c, 0);
        for (std::size_t k = 0; k < r; ++k) {
            for (std::size_t j = 0; j < c; ++j) {
                std::int64_t best = INT64_MIN;
                for (std::size_t q = 0; q < r; ++q)
                    if (q != k) best = std::max(best, zn.values[q * c + j]);
                out.values[k * c + j] = best;
            }
        }
        return stage(std::move(out), name);
    }

    QuantizedTensor slice_rows(const QuantizedTensor& z, std::size_t begin, std::size_t count) {
        QuantizedTensor out;
        out.format = z.format;
        out.shape = {count, z.cols()};
        out.values.assign(z.values.begin() + static_cast<std::ptrdiff_t>(begin * z.cols()),
                          z.values.begin() + static_cast<std::ptrdiff_t>((begin + count) * z.cols()));
        return out;
    }

private:
    // Records the stage and, when unfused, moves it through off-chip memory.
    QuantizedTensor stage(QuantizedTensor q, const std::string& name) {
        if (!opt_.fused) q = round_trip(q);
        out_.trace.push_back(LayerTrace{name, q.values, q.format.scale});
        return q;
    }

    QuantizedTensor round_trip(const QuantizedTensor& q) {
        const std::size_t width = static_cast<std::size_t>((q.format.bits + 7) / 8);
        std::vector<unsigned char> dram(q.values.size() * width);
        for (std::size_t k = 0; k < q.values.size(); ++k) {
            const auto bits = static_cast<std::uint64_t>(q.values[k]);
            for (std::size_t b = 0; b < width; ++b) dram[k * width + b] = static_cast<unsigned char>(bits >> (8 * b));
        }
        out_.offchip_bytes += 2 * dram.size();
        QuantizedTensor back = q;
        for (std::size_t k = 0; k < q.values.size(); ++k) {
            std::uint64_t bits = 0;
            for (std::size_t b = 0; b < width; ++b) bits |= static_cast<std::uint64_t>(dram[k * width + b]) << (8 * b);
            const int shift = static_cast<int>(64 - 8 * width);
            back.values[k] = static_cast<std::int64_t>(bits << shift) >> shift;  // sign-extend
        }
        return back;
    }

    EmulatorOptions opt_;
    FixedPointResult& out_;
};

}  // namespace

FixedPointResult fused_inference(const gnn::GnnParams& params, const ChannelSet& ch, const ObjectiveSetup& setup,
                                 const EmulatorOptions& options) {
    if (options.bits < 2 || options.bits > 32) throw ConfigError("emulator bits must lie in [2, 32]");
    const gnn::GnnConfig& cfg = params.config;
    const std::size_t M = ch.n_bs();
    if (!cfg.shared_weights && M != params.networks.size()) throw DimensionError("channel set / model BS count mismatch");
    FixedPointResult res;
    Emulator em(options, res);
    const int N = cfg.dims.n_rf, Nt = cfg.dims.n_tx;
    for (std::size_t m = 0; m < M; ++m) {
        const gnn::BsNetwork& net = params.network(m);
        const std::string bs = "bs" + std::to_string(m) + ".";
        const gnn::NodeFeatures f = gnn::build_node_features(ch, m, cfg.normalize_inputs);
        QuantizedTensor z;
        bool have = false;
        if (f.n_users > 0) {
            z = em.mlp(em.input(f.com, bs + "input.com"), net.com, bs + "com");
            have = true;
        }
        if (f.n_targets > 0) {
            QuantizedTensor s = em.mlp(em.input(f.sen, bs + "input.sen"), net.sen, bs + "sen");
            z = have ? em.concat_rows(std::move(z), std::move(s), bs + "nodes") : std::move(s);
            have = true;
        }
        if (!have) throw PreconditionError("emulation needs at least one user or target");
        z = em.append_mean(std::move(z), bs + "mean");
        for (std::size_t l = 0; l < net.conv.size(); ++l) {
            const std::string p = bs + "conv" + std::to_string(l);
            const QuantizedTensor zn = em.mlp(z, net.conv[l].neighbor, p + ".neighbor");
            QuantizedTensor agg = em.max_others(zn, p + ".max");
            z = em.mlp(em.concat_cols(z, std::move(agg), p + ".concat"), net.conv[l].combine, p + ".combine");
        }
        const std::size_t rows = z.rows();
        const Tensor dig = em.linear(em.slice_rows(z, 0, rows - 1), net.digital, false, bs + "head.digital").dequantize();
        const Tensor ana = em.linear(em.slice_rows(z, rows - 1, 1), net.analog, false, bs + "head.analog").dequantize();

        // Float post-step: phases and power normalisation.
        CMatrix F(Nt, N);
        for (int a = 0; a < Nt; ++a)
            for (int b = 0; b < N; ++b) F(a, b) = std::polar(1.0, ana[static_cast<std::size_t>(a * N + b)]);
        const std::size_t K = rows - 1;
        CMatrix W(N, static_cast<Eigen::Index>(K));
        for (std::size_t k = 0; k < K; ++k)
            for (int n = 0; n < N; ++n)
                W(n, static_cast<Eigen::Index>(k)) = cd(dig.at(k, static_cast<std::size_t>(n)),
                                                        dig.at(k, static_cast<std::size_t>(N + n)));
        const double p = bs_power(F, W);
        if (p > 0.0 && std::isfinite(p)) W *= std::sqrt(setup.noise.power / p);
        else W.setZero();
        res.beams.analog.push_back(std::move(F));
        res.beams.digital.push_back(std::move(W));
    }
    res.report = wscsc(ch, res.beams, setup.weights, setup.noise, setup.receive);
    res.float_wscsc = gnn::infer(params, ch, setup).report.wscsc;
    res.relative_delta = std::abs(res.report.wscsc - res.float_wscsc) / std::max(std::abs(res.float_wscsc), 1e-300);
    return res;
}

}  // namespace isac::fpga
