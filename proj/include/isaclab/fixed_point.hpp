#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "isaclab/gnn.hpp"
#include "isaclab/tensor.hpp"

namespace isac::fpga {

// Symmetric signed format: real = q * scale, |q| <= 2^(bits-1) - 1.
struct FixedPointFormat {
    int bits = 16;
    double scale = 1.0;

    std::int64_t qmax() const { return (std::int64_t{1} << (bits - 1)) - 1; }
    // Fraction bits of the nearest power-of-two grid at or finer than `scale`,
    // clamped to [0, bits-1]. Informational.
    int frac_bits() const;
    void validate() const;
};

struct QuantizedTensor {
    ad::Shape shape;
    std::vector<std::int64_t> values;  // row-major
    FixedPointFormat format;
    std::size_t clamped = 0;  // entries that hit the range limit

    std::size_t rows() const { return shape.size() == 1 ? 1 : shape[0]; }
    std::size_t cols() const { return shape.back(); }
    ad::Tensor dequantize() const;
};

// Round half to even.
std::int64_t round_even(double x);

// Per-tensor scale max|x| / qmax (scale 1 for an all-zero tensor).
QuantizedTensor calibrate_and_quantize(const ad::Tensor& t, int bits);
QuantizedTensor quantize_with_scale(const ad::Tensor& t, int bits, double scale);

struct AccumulatorPolicy {
    int bits = 32;
    bool auto_widen = true;  // widen to what k * qmax_a * qmax_b needs instead of failing
};

// Accumulator width the product needs: bits of k * qmax_a * qmax_b plus sign.
int required_accumulator_bits(std::size_t k, int bits_a, int bits_b);

struct IntMatmulResult {
    std::vector<std::int64_t> acc;  // r x c raw accumulators at scale a.scale * b.scale
    std::size_t rows = 0, cols = 0;
    int accumulator_bits = 0;
};

// Exact integer multiply-accumulate. Throws EmulationError when the accumulator
// would overflow and the policy does not allow widening.
IntMatmulResult integer_matmul(const QuantizedTensor& a, const QuantizedTensor& b, const AccumulatorPolicy& acc = {});

// Dynamic requantization of raw accumulators to `bits`: q = round(acc * qmax / max|acc|)
// computed exactly in integers.
QuantizedTensor requantize(const IntMatmulResult& r, double acc_scale, int bits);

QuantizedTensor fixed_point_matmul(const QuantizedTensor& a, const QuantizedTensor& b, int out_bits,
                                   const AccumulatorPolicy& acc = {});

// ---- whole-network emulation ---------------------------------------------------

struct EmulatorOptions {
    int bits = 16;
    AccumulatorPolicy accumulator;
    bool fused = true;  // false: every intermediate makes an off-chip round trip
};

struct LayerTrace {
    std::string name;
    std::vector<std::int64_t> values;
    double scale = 1.0;
};

struct FixedPointResult {
    BeamformerSet beams;
    SinrReport report;
    double float_wscsc = 0.0;
    double relative_delta = 0.0;  // |wscsc - float_wscsc| / max(|float_wscsc|, tiny)
    std::vector<LayerTrace> trace;  // integer activations per stage, all BSs
    std::size_t clamped = 0;
    std::size_t offchip_bytes = 0;  // activation bytes moved off chip (0 when fused)
};

// Fixed-point forward of every BS network followed by float phase/power
// normalisation and exact metric evaluation. Also runs the float model on the
// same channels to report the accuracy delta.
FixedPointResult fused_inference(const gnn::GnnParams& params, const ChannelSet& ch, const ObjectiveSetup& setup,
                                 const EmulatorOptions& options);

}  // namespace isac::fpga
