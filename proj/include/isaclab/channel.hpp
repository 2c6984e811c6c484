#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "isaclab/complex_ops.hpp"
#include "isaclab/rng.hpp"

namespace isac {

// Array and population sizes of the cell-free network.
struct SystemDims {
    int n_bs = 2;         // M
    int n_users = 2;      // I
    int n_targets = 2;    // J
    int n_rf = 6;         // N, RF chains per BS
    int n_tx = 8;         // N_t, antennas per BS
    int n_user_ant = 2;   // N_u
    int n_radar_ant = 4;  // N_r

    std::size_t streams() const { return static_cast<std::size_t>(n_users + n_targets); }
    // Throws ConfigError naming the violated constraint.
    void validate() const;
};

// Dimensions plus the sampled geometry. Angles in radians, distances in meters.
struct Topology {
    SystemDims dims;
    double spacing_bs = 0.5;  // wavelength-normalised
    double spacing_user = 0.5;
    double spacing_radar = 0.5;

    std::vector<std::vector<double>> angle_user;    // [m][i]
    std::vector<std::vector<double>> angle_target;  // [m][j], BS -> target
    std::vector<double> angle_target_rx;            // [j], target -> radar receiver
    std::vector<std::vector<double>> dist_user;     // [m][i]
    std::vector<std::vector<double>> dist_target;   // [m][j]
    std::vector<double> dist_target_rx;             // [j]

    void validate() const;
};

struct PathLossModel {
    double ref_db = -30.0;     // PL_0
    double slope_db = 25.0;    // dB per decade
    double ref_distance = 1.0; // d_0, meters
};

struct ChannelSet {
    std::vector<std::vector<CMatrix>> com;  // [m][i], N_u x N_t
    std::vector<std::vector<CMatrix>> sen;  // [m][j], N_r x N_t
    std::vector<std::vector<double>> pathloss_com;
    std::vector<std::vector<double>> pathloss_sen;
    double kappa_com = 0.0;
    double kappa_sen = 0.0;

    std::size_t n_bs() const { return com.size(); }
    std::size_t n_users() const { return com.empty() ? 0 : com[0].size(); }
    std::size_t n_targets() const { return sen.empty() ? 0 : sen[0].size(); }
    bool all_finite() const;
};

ChannelSet operator+(const ChannelSet& a, const ChannelSet& b);
ChannelSet operator-(const ChannelSet& a, const ChannelSet& b);
bool operator==(const ChannelSet& a, const ChannelSet& b);

enum class CsiErrorModel { None, Bounded, Gaussian };

CsiErrorModel parse_csi_model(const std::string& name);
std::string to_string(CsiErrorModel model);

struct CsiErrorSpec {
    CsiErrorModel model = CsiErrorModel::None;
    double eps_com = 0.0;     // per-entry magnitude bound (bounded model)
    double eps_sen = 0.0;
    double sigma2_com = 0.0;  // per-entry variance (gaussian model)
    double sigma2_sen = 0.0;
    // When set, bounds scale with the RMS entry magnitude of each channel matrix
    // and variances with its mean entry power (normalised MSE).
    bool relative = false;

    void validate() const;
};

// True channel = estimate + error, held bitwise.
struct CsiRealization {
    ChannelSet estimated;
    ChannelSet error;
    ChannelSet true_channel;
};

// (1/n) [1, e^{j 2 pi d sin(theta)}, ..., e^{j 2 pi (n-1) d sin(theta)}]^T
CVector steering_vector(int n, double spacing, double theta);

// Linear gain 10^((PL_0 - slope*log10(d/d_0))/10). Throws DomainError for d <= 0.
double pathloss_linear(double distance, const PathLossModel& model = {});

// sqrt(kappa/(1+kappa)) * ones + sqrt(1/(1+kappa)) * CN(0,1) entries.
CMatrix rician_core(int rows, int cols, double kappa, RngStream& rng);

enum class LinkKind { Com, Sen };

// sqrt(PL) * diag(rx steering) * core * diag(tx steering) for BS m and user/target idx.
// Sensing links use the product of the BS->target and target->receiver gains.
CMatrix assemble_channel(LinkKind kind, const Topology& topo, int m, int idx, double kappa, RngStream& rng,
                         const PathLossModel& pl = {});
// Same construction from a caller-supplied core (testing and replay).
CMatrix assemble_channel_from_core(LinkKind kind, const Topology& topo, int m, int idx, const CMatrix& core,
                                   const PathLossModel& pl = {});

ChannelSet assemble_channels(const Topology& topo, double kappa_com, double kappa_sen, RngStream& rng,
                             const PathLossModel& pl = {});

// Draws an error per entry and forms estimated = true - error.
CsiRealization apply_csi_error(const ChannelSet& true_channel, const CsiErrorSpec& spec, RngStream& rng);

// Keeps `estimated` fixed and draws a fresh error around it (Monte Carlo over
// the unknown error in the expectation objective).
CsiRealization sample_error_around(const ChannelSet& estimated, const CsiErrorSpec& spec, RngStream& rng);

struct ScenarioConfig {
    SystemDims dims;
    double spacing_bs = 0.5;
    double spacing_user = 0.5;
    double spacing_radar = 0.5;
    double dist_min = 20.0;
    double dist_max = 30.0;
    double kappa_com = 0.3;
    double kappa_sen = 0.3;
    PathLossModel pathloss;
    CsiErrorSpec csi;
};

struct Scenario {
    Topology topology;
    ChannelSet channels;  // true channels
    CsiRealization csi;
};

Topology sample_topology(const ScenarioConfig& cfg, RngStream& rng);
Scenario generate_scenario(const ScenarioConfig& cfg, RngStream& rng);

}  // namespace isac
