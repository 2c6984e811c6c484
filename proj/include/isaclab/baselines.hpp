#pragma once

#include <string>
#include <vector>

#include "isaclab/channel.hpp"
#include "isaclab/metrics.hpp"

namespace isac::baselines {

enum class BaselineKind { Mrt, Zf, Mmse };

BaselineKind parse_baseline(const std::string& name);
std::string to_string(BaselineKind kind);

// Analog stage for BS m: column k (k < I+J) holds the phases of stream k's
// dominant right singular vector; the remaining columns hold the phases of the
// dominant right singular vector of all of BS m's channels stacked (each
// Frobenius-normalised). Singular vectors are phase-fixed so their first entry
// is real and non-negative.
CMatrix baseline_analog(const ChannelSet& ch, std::size_t m, int n_rf);

struct EffectiveChannel {
    CVector row;  // length N, entries of the 1 x N row vector
    bool zero = false;
};

// v^H H F with v the dominant left singular vector of H F.
EffectiveChannel effective_channel(const CMatrix& h, const CMatrix& analog);

struct DigitalResult {
    CMatrix w;                  // N x K
    bool pinv_fallback = false; // ZF hit a rank-deficient A
};

// `a` stacks the K effective rows. Columns are then scaled so every nonzero
// stream gets ||F w_k||^2 = P/K' (K' nonzero streams).
DigitalResult baseline_digital(BaselineKind kind, const CMatrix& a, const CMatrix& analog, double noise, double power);

// Moore-Penrose right inverse A^H (A A^H)^+ with eigenvalues below tol * max dropped.
CMatrix right_pseudo_inverse(const CMatrix& a, double tol, bool* truncated = nullptr);

struct BaselineOptions {
    bool centralized = false;  // joint effective channel / precoder over all BSs
};

struct BaselineResult {
    BeamformerSet beams;
    SinrReport report;
    bool pinv_fallback = false;
    std::size_t zero_channels = 0;
};

BaselineResult run_baseline(BaselineKind kind, const ChannelSet& ch, const ObjectiveSetup& setup, int n_rf,
                            const BaselineOptions& options = {});

}  // namespace isac::baselines
