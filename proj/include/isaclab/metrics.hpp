#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "isaclab/channel.hpp"
#include "isaclab/complex_ops.hpp"

namespace isac {

// Analog matrices F_m (N_t x N) and digital precoders per BS. Digital column k of
// BS m is w_com[m][k] for k < I and w_sen[m][k - I] otherwise.
struct BeamformerSet {
    std::vector<CMatrix> analog;
    std::vector<CMatrix> digital;

    std::size_t n_bs() const { return analog.size(); }
    CVector w_com(std::size_t m, std::size_t i) const { return digital[m].col(static_cast<Eigen::Index>(i)); }
    CVector w_sen(std::size_t m, std::size_t j, std::size_t n_users) const {
        return digital[m].col(static_cast<Eigen::Index>(n_users + j));
    }
};

enum class ReceiveMode { Matched, Mvdr };

ReceiveMode parse_receive_mode(const std::string& name);
std::string to_string(ReceiveMode mode);

struct ReceiveBeamformers {
    std::vector<CVector> u;  // entries of the 1 x N_r row vector per target
    ReceiveMode mode = ReceiveMode::Mvdr;
};

struct ObjectiveWeights {
    double alpha_com = 0.5;
    double alpha_sen = 0.5;
    double eta = 5e6;

    void validate() const;
};

struct NoiseAndPower {
    double noise_user = 1e-9;   // sigma_i^2, linear (mW)
    double noise_radar = 1e-9;  // sigma_r^2, linear (mW)
    double power = 1.0;         // P per BS, linear (mW)

    void validate() const;
};

// Everything besides channels and beams that an objective evaluation needs.
struct ObjectiveSetup {
    ObjectiveWeights weights;
    NoiseAndPower noise;
    ReceiveMode receive = ReceiveMode::Mvdr;
    bool eta_in_sensing = true;  // keep eta in the imperfect-CSI sensing term
};

struct SinrReport {
    std::vector<double> gamma_user;
    std::vector<double> gamma_target;
    double scc = 0.0;
    double ssc = 0.0;
    double wscsc = 0.0;
};

// ---- plain evaluation --------------------------------------------------------

// sum over the BS's beams of ||F w||^2
double bs_power(const CMatrix& analog, const CMatrix& digital);

double user_sinr(const ChannelSet& ch, const BeamformerSet& bf, double noise, std::size_t i);
double radar_sinr(const ChannelSet& ch, const BeamformerSet& bf, const CVector& u, double noise, std::size_t j);

// MVDR or matched-filter receive vector (unit norm). Throws DegenerateTargetError
// when the target's desired signature is zero.
CVector receive_beamformer(const ChannelSet& ch, const BeamformerSet& bf, double noise, std::size_t j,
                           ReceiveMode mode);
ReceiveBeamformers receive_beamformers(const ChannelSet& ch, const BeamformerSet& bf, double noise, ReceiveMode mode);

double user_sinr_imperfect(const CsiRealization& csi, const BeamformerSet& bf, double noise, std::size_t i);
double radar_sinr_imperfect(const CsiRealization& csi, const BeamformerSet& bf, const CVector& u, double noise,
                            std::size_t j);

SinrReport wscsc(const ChannelSet& ch, const BeamformerSet& bf, const ObjectiveWeights& w, const NoiseAndPower& np,
                 ReceiveMode mode = ReceiveMode::Mvdr);
// Imperfect-CSI objective for one error realization. The radar receiver is built
// from the estimated channels.
SinrReport wscsc_imperfect(const CsiRealization& csi, const BeamformerSet& bf, const ObjectiveWeights& w,
                           const NoiseAndPower& np, ReceiveMode mode = ReceiveMode::Mvdr, bool eta_in_sensing = true);

struct ExpectedObjective {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation across draws
    double mean_scc = 0.0;
    double mean_ssc = 0.0;
};

// Monte Carlo mean of the imperfect-CSI objective over n_draws error
// realizations; `sampler(k)` yields draw k with the estimate held fixed.
ExpectedObjective wscsc_expected(const std::function<CsiRealization(std::size_t)>& sampler, const BeamformerSet& bf,
                                 const ObjectiveWeights& w, const NoiseAndPower& np, std::size_t n_draws,
                                 ReceiveMode mode = ReceiveMode::Mvdr, bool eta_in_sensing = true);

// Per-entry constant-modulus deviation max | |F(n_t, n)| - 1 | across BSs.
double max_modulus_error(const BeamformerSet& bf);

// ---- differentiable evaluation -----------------------------------------------

struct BeamformerVars {
    std::vector<ad::CVar> analog;
    std::vector<ad::CVar> digital;
};

BeamformerVars constant(ad::Tape& tape, const BeamformerSet& bf);
BeamformerSet values(const BeamformerVars& vars);

ad::Var bs_power(const ad::CVar& analog, const ad::CVar& digital);

struct ObjectiveTerms {
    ad::Var wscsc;
    ad::Var scc;
    ad::Var ssc;
    std::vector<ad::Var> gamma_user;
    std::vector<ad::Var> gamma_target;

    SinrReport report() const;
};

// Receive vectors are computed from current values and enter as constants.
ObjectiveTerms wscsc_terms(ad::Tape& tape, const ChannelSet& ch, const BeamformerVars& bf, const ObjectiveWeights& w,
                           const NoiseAndPower& np, ReceiveMode mode = ReceiveMode::Mvdr);
ObjectiveTerms wscsc_terms_imperfect(ad::Tape& tape, const CsiRealization& csi, const BeamformerVars& bf,
                                     const ObjectiveWeights& w, const NoiseAndPower& np,
                                     ReceiveMode mode = ReceiveMode::Mvdr, bool eta_in_sensing = true);

}  // namespace isac
