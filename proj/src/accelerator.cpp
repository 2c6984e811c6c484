#include "isaclab/accelerator.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "isaclab/errors.hpp"

namespace isac::fpga {

void AcceleratorConfig::validate() const {
    if (array_size < 1) throw ConfigError("accelerator.array_size must be >= 1");
    if (bus_bits != 32 && bus_bits != 64 && bus_bits != 128 && bus_bits != 256)
        throw ConfigError("accelerator.bus_bits must be one of 32, 64, 128, 256");
    if (!(clock_ns > 0.0)) throw ConfigError("accelerator.clock_ns must be > 0");
    if (buffer_bytes == 0) throw ConfigError("accelerator.buffer_bytes must be > 0");
}

std::vector<LayerShape> network_layers(const gnn::GnnConfig& c, int n_users, int n_targets) {
    if (n_users < 0 || n_targets < 0 || n_users + n_targets < 1)
        throw PreconditionError("network_layers needs at least one user or target");
    const auto I = static_cast<std::size_t>(n_users), J = static_cast<std::size_t>(n_targets);
    const std::size_t nodes = I + J + 1;
    const auto h = static_cast<std::size_t>(c.hidden), e = static_cast<std::size_t>(c.embed),
               ch = static_cast<std::size_t>(c.conv_hidden);
    std::vector<LayerShape> out;
    if (I > 0) {
        out.push_back({"com.0", I, static_cast<std::size_t>(c.com_input()), h});
        out.push_back({"com.1", I, h, e});
    }
    if (J > 0) {
        out.push_back({"sen.0", J, static_cast<std::size_t>(c.sen_input()), h});
        out.push_back({"sen.1", J, h, e});
    }
    for (int l = 0; l < c.conv_layers; ++l) {
        const std::string p = "conv" + std::to_string(l);
        out.push_back({p + ".neighbor.0", nodes, e, ch});
        out.push_back({p + ".neighbor.1", nodes, ch, e});
        out.push_back({p + ".combine.0", nodes, 2 * e, ch});
        out.push_back({p + ".combine.1", nodes, ch, e});
    }
    out.push_back({"head.digital", I + J, e, static_cast<std::size_t>(c.digital_output())});
    out.push_back({"head.analog", 1, e, static_cast<std::size_t>(c.analog_output())});
    return out;
}

std::vector<Tile> loop_tiling_plan(const LayerShape& L, std::size_t capacity_bytes, int bytes_per_element,
                                   std::size_t align) {
    if (capacity_bytes == 0) throw ConfigError("tiling capacity must be > 0");
    if (L.rows == 0 || L.k == 0 || L.cols == 0) throw PreconditionError("layer " + L.name + " has an empty dimension");
    if (align == 0) align = 1;
    const auto b = static_cast<std::size_t>(bytes_per_element);
    // Elements available to one half of the ping-pong pair.
    const std::size_t budget = capacity_bytes / (2 * b);
    std::size_t best_count = 0, best_tr = 0, best_tc = 0;
    for (std::size_t tr = L.rows; tr >= 1; --tr) {
        if (tr * L.k >= budget) continue;
        const std::size_t tc_max = (budget - tr * L.k) / (L.k + tr);
        if (tc_max == 0) continue;
        std::size_t tc;
        if (tc_max >= L.cols) tc = L.cols;
        else if (tc_max >= align) tc = tc_max / align * align;
        else tc = tc_max;
        const std::size_t count = ((L.rows + tr - 1) / tr) * ((L.cols + tc - 1) / tc);
        if (best_count == 0 || count < best_count) {
            best_count = count;
            best_tr = tr;
            best_tc = tc;
        }
    }
    if (best_count == 0)
        throw TilingError("layer " + L.name + ": one row of k=" + std::to_string(L.k) + " does not fit in " +
                          std::to_string(capacity_bytes) + " bytes with double buffering");
    std::vector<Tile> tiles;
    for (std::size_t c0 = 0; c0 < L.cols; c0 += best_tc)
        for (std::size_t r0 = 0; r0 < L.rows; r0 += best_tr)
            tiles.push_back({r0, std::min(best_tr, L.rows - r0), c0, std::min(best_tc, L.cols - c0)});
    return tiles;
}

namespace {

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

}  // namespace

LatencyReport latency_estimate(const std::vector<LayerShape>& layers, const AcceleratorConfig& cfg, int bits) {
    cfg.validate();
    if (bits < 2 || bits > 32) throw ConfigError("bits must lie in [2, 32]");
    if (layers.empty()) throw PreconditionError("latency_estimate needs at least one layer");
    LatencyReport rep;
    rep.bits = bits;
    rep.config = cfg;
    const std::uint64_t bus_bytes = static_cast<std::uint64_t>(cfg.bus_bits) / 8;
    const auto bytes_of = [bits](std::uint64_t elements) { return ceil_div(elements * static_cast<std::uint64_t>(bits), 8); };
    const int elem_bytes = (bits + 7) / 8;
    const std::uint64_t S = static_cast<std::uint64_t>(cfg.array_size);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const LayerShape& L = layers[l];
        LayerLatency ll;
        ll.name = L.name;
        ll.rows = L.rows;
        ll.k = L.k;
        ll.cols = L.cols;
        const auto tiles = loop_tiling_plan(L, cfg.buffer_bytes, elem_bytes, cfg.array_size);
        ll.tiles = tiles.size();
        for (const Tile& t : tiles) ll.compute_cycles += ceil_div(t.rows, S) * ceil_div(t.cols, S) * (L.k + S);
        ll.weight_bytes = bytes_of(static_cast<std::uint64_t>(L.k) * L.cols + L.cols);
        if (!cfg.fused) ll.activation_bytes = bytes_of(static_cast<std::uint64_t>(L.rows) * (L.k + L.cols));
        ll.transfer_cycles = ceil_div(ll.weight_bytes + ll.activation_bytes, bus_bytes);
        rep.weight_load_cycles += ceil_div(ll.weight_bytes, bus_bytes);
        rep.compute_cycles += ll.compute_cycles;
        rep.transfer_cycles += ll.transfer_cycles;
        rep.layers.push_back(std::move(ll));
    }
    if (cfg.fused) {
        rep.input_load_cycles = ceil_div(bytes_of(static_cast<std::uint64_t>(layers.front().rows) * layers.front().k), bus_bytes);
        rep.writeback_cycles = ceil_div(bytes_of(static_cast<std::uint64_t>(layers.back().rows) * layers.back().cols), bus_bytes);
    }
    // Ping-pong pipeline: layer l's transfer overlaps layer l-1's compute.
    std::uint64_t total = rep.input_load_cycles;
    for (std::size_t l = 0; l < rep.layers.size(); ++l) {
        auto& ll = rep.layers[l];
        ll.stage_cycles = l == 0 ? ll.transfer_cycles : std::max(rep.layers[l - 1].compute_cycles, ll.transfer_cycles);
        total += ll.stage_cycles;
    }
    total += rep.layers.back().compute_cycles + rep.writeback_cycles;
    rep.total_cycles = total;
    rep.total_ms = static_cast<double>(total) * cfg.clock_ns * 1e-6;
    return rep;
}

std::string to_json(const LatencyReport& r) {
    nlohmann::ordered_json layers = nlohmann::ordered_json::array();
    for (const auto& l : r.layers) {
        layers.push_back({{"name", l.name},
                          {"rows", l.rows},
                          {"k", l.k},
                          {"cols", l.cols},
                          {"tiles", l.tiles},
                          {"weight_bytes", l.weight_bytes},
                          {"activation_bytes", l.activation_bytes},
                          {"compute_cycles", l.compute_cycles},
                          {"transfer_cycles", l.transfer_cycles},
                          {"stage_cycles", l.stage_cycles}});
    }
    const nlohmann::ordered_json doc{{"bits", r.bits},
                                     {"array_size", r.config.array_size},
                                     {"bus_bits", r.config.bus_bits},
                                     {"clock_ns", r.config.clock_ns},
                                     {"buffer_bytes", r.config.buffer_bytes},
                                     {"fused", r.config.fused},
                                     {"input_load_cycles", r.input_load_cycles},
                                     {"weight_load_cycles", r.weight_load_cycles},
                                     {"compute_cycles", r.compute_cycles},
                                     {"transfer_cycles", r.transfer_cycles},
                                     {"writeback_cycles", r.writeback_cycles},
                                     {"total_cycles", r.total_cycles},
                                     {"total_ms", r.total_ms},
                                     {"layers", std::move(layers)}};
    return doc.dump(2);
}

std::string layers_csv(const LatencyReport& r) {
    std::ostringstream os;
    os << "layer,rows,k,cols,tiles,weight_bytes,activation_bytes,compute_cycles,transfer_cycles,stage_cycles\n";
    for (const auto& l : r.layers) {
        os << l.name << ',' << l.rows << ',' << l.k << ',' << l.cols << ',' << l.tiles << ',' << l.weight_bytes << ','
           << l.activation_bytes << ',' << l.compute_cycles << ',' << l.transfer_cycles << ',' << l.stage_cycles << '\n';
    }
    return os.str();
}

}  // namespace isac::fpga
