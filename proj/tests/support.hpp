#pragma once

#include <cmath>
#include <cstdint>
#include <functional>

#include "isaclab/channel.hpp"
#include "isaclab/gnn.hpp"
#include "isaclab/metrics.hpp"
#include "isaclab/rng.hpp"

namespace testing {

inline isac::ChannelSet random_channels(const isac::SystemDims& d, std::uint64_t seed, double kappa = 0.3) {
    isac::ScenarioConfig cfg;
    cfg.dims = d;
    cfg.kappa_com = cfg.kappa_sen = kappa;
    isac::RngStream rng(seed, {77});
    return isac::generate_scenario(cfg, rng).channels;
}

// Unit-modulus analog matrices and digital precoders scaled to `power` per BS.
inline isac::BeamformerSet random_beams(const isac::SystemDims& d, std::uint64_t seed, double power) {
    isac::RngStream rng(seed, {78});
    isac::BeamformerSet bf;
    for (int m = 0; m < d.n_bs; ++m) {
        isac::CMatrix f(d.n_tx, d.n_rf);
        for (int r = 0; r < d.n_tx; ++r)
            for (int c = 0; c < d.n_rf; ++c) f(r, c) = std::polar(1.0, rng.uniform(-M_PI, M_PI));
        isac::CMatrix w(d.n_rf, d.n_users + d.n_targets);
        for (int r = 0; r < w.rows(); ++r)
            for (int c = 0; c < w.cols(); ++c) w(r, c) = rng.complex_normal();
        w *= std::sqrt(power / isac::bs_power(f, w));
        bf.analog.push_back(f);
        bf.digital.push_back(w);
    }
    return bf;
}

// Moves every hidden/output bias off zero so no ReLU input sits exactly on its kink.
inline void generic_biases(isac::gnn::GnnParams& p, std::uint64_t seed) {
    isac::RngStream rng(seed, {79});
    for (auto* q : p.parameters())
        if (q->name.ends_with(".bias") && q->name != "head.analog.bias")
            for (double& v : q->value.data()) v = rng.uniform(-0.1, 0.1);
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

// Central difference of f around x[k].
inline double central_diff(const std::function<double()>& f, double& x, double h) {
    const double x0 = x;
    x = x0 + h;
    const double fp = f();
    x = x0 - h;
    const double fm = f();
    x = x0;
    return (fp - fm) / (2 * h);
}

}  // namespace testing
