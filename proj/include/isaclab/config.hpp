#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "isaclab/accelerator.hpp"
#include "isaclab/channel.hpp"
#include "isaclab/gnn.hpp"
#include "isaclab/metrics.hpp"

namespace isac {

double dbm_to_mw(double dbm);
double mw_to_dbm(double mw);

struct PowerConfig {
    double power_dbm = 0.0;
    double noise_user_dbm = -90.0;   // 1e-9 mW
    double noise_radar_dbm = -90.0;

    NoiseAndPower linear() const;
};

struct CsiConfig {
    // Error model used by every run; magnitudes are relative by default.
    CsiErrorSpec spec = [] {
        CsiErrorSpec s;
        s.relative = true;
        return s;
    }();
    int eval_draws = 50;      // error realisations per expected-WSCSC evaluation
};

struct SweepConfig {
    int draws = 20;
    std::vector<std::string> schemes{"gnn", "mmse", "zf", "mrt"};
    std::vector<double> power_dbm{-10, -5, 0, 5, 10, 15, 20};
    std::vector<double> n_bs{1, 2, 3};
    std::vector<double> n_users{1, 2, 3, 4};
    std::vector<double> n_targets{1, 2, 3, 4};
    std::vector<double> alpha_sen{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    std::vector<double> csi{0.0, 0.005, 0.01, 0.02, 0.05};
    std::string csi_model = "gaussian";  // model used by the csi sweep
    bool centralized_zf = false;
    int jobs = 1;
};

struct ConvergeConfig {
    std::vector<int> n_bs{1, 2, 3};
    std::vector<double> kappa{0.3, 3.0};
};

struct LatencyConfig {
    std::vector<int> bits{8, 16};
    std::vector<int> bus_bits{64, 128};
    fpga::AcceleratorConfig accelerator;
    std::string checkpoint;  // empty: <out>/train/checkpoint.json
    int accuracy_draws = 5;
};

struct ExperimentConfig {
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    ScenarioConfig scenario;
    PowerConfig power;
    ObjectiveWeights weights;
    ReceiveMode receive = ReceiveMode::Mvdr;
    bool eta_in_sensing = true;
    CsiConfig csi;
    gnn::GnnConfig gnn;
    gnn::TrainConfig train;
    SweepConfig sweep;
    ConvergeConfig converge;
    LatencyConfig latency;

    ObjectiveSetup objective() const;
    // Throws ConfigError naming the violated constraint.
    void validate() const;
};

// Parses JSON text. An empty or whitespace-only document yields the defaults.
// Unknown keys and type mismatches raise ConfigError with a dotted path such as
// "config.train.learning_rate".
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Fully resolved configuration as canonical JSON (sorted keys, 2-space indent).
std::string config_to_json(const ExperimentConfig& cfg);
// FNV-1a 64 of the canonical JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace isac
