#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "isaclab/gnn.hpp"

namespace isac::fpga {

struct AcceleratorConfig {
    int array_size = 16;              // S x S systolic array
    int bus_bits = 64;                // off-chip bus width
    double clock_ns = 10.0;
    std::size_t buffer_bytes = 512 * 1024;  // on-chip buffer, split into ping-pong halves
    bool fused = true;                // intermediates stay on chip

    void validate() const;
};

// One dense layer as seen by the array: (rows x k) times (k x cols).
struct LayerShape {
    std::string name;
    std::size_t rows = 0;
    std::size_t k = 0;
    std::size_t cols = 0;
};

// Matmul layers of one BS network in execution order for I users, J targets.
std::vector<LayerShape> network_layers(const gnn::GnnConfig& config, int n_users, int n_targets);

struct Tile {
    std::size_t row0 = 0, rows = 0;
    std::size_t col0 = 0, cols = 0;
};

// Output tiles that cover the rows x cols output exactly once. A tile's working
// set (k x tile_cols weights, tile_rows x k inputs, tile_rows x tile_cols
// outputs) is held twice for double buffering and must fit `capacity_bytes`.
// Column blocks are multiples of `align` unless they cover the whole layer or
// fewer than `align` columns fit.
std::vector<Tile> loop_tiling_plan(const LayerShape& layer, std::size_t capacity_bytes, int bytes_per_element,
                                   std::size_t align = 16);

struct LayerLatency {
    std::string name;
    std::size_t rows = 0, k = 0, cols = 0;
    std::size_t tiles = 0;
    std::uint64_t weight_bytes = 0;
    std::uint64_t activation_bytes = 0;  // off-chip activation traffic charged to this layer
    std::uint64_t compute_cycles = 0;
    std::uint64_t transfer_cycles = 0;
    std::uint64_t stage_cycles = 0;  // contribution to the pipelined total
};

struct LatencyReport {
    int bits = 16;
    AcceleratorConfig config;
    std::vector<LayerLatency> layers;
    std::uint64_t input_load_cycles = 0;
    std::uint64_t weight_load_cycles = 0;  // sum of weight transfers
    std::uint64_t compute_cycles = 0;      // sum over layers
    std::uint64_t transfer_cycles = 0;     // sum over layers (weights + activations)
    std::uint64_t writeback_cycles = 0;
    std::uint64_t total_cycles = 0;
    double total_ms = 0.0;
};

// Layer-level roofline with ping-pong overlap: while layer l computes, layer
// l+1's weights stream in, so
//   total = input load + t_0 + sum_{l>=1} max(c_{l-1}, t_l) + c_last + writeback.
// compute cycles per tile = ceil(r/S) * ceil(c/S) * (k + S); transfers move
// ceil(bytes / bus_bytes) cycles.
LatencyReport latency_estimate(const std::vector<LayerShape>& layers, const AcceleratorConfig& config, int bits);

std::string to_json(const LatencyReport& report);
std::string layers_csv(const LatencyReport& report);

}  // namespace isac::fpga
