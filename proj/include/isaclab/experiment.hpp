#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "isaclab/accelerator.hpp"
#include "isaclab/config.hpp"
#include "isaclab/gnn.hpp"

namespace isac::experiment {

std::string code_version();

enum class SweepVar { Power, NBs, NUsers, NTargets, Alpha, Csi };
SweepVar parse_sweep_var(const std::string& name);
std::string to_string(SweepVar var);

const std::vector<double>& sweep_grid(const ExperimentConfig& cfg, SweepVar var);
// Copy of cfg with one sweep coordinate set. The alpha sweep sets alpha_sen = v
// and alpha_com = 1 - v. The csi sweep sets both magnitudes of sweep.csi_model to
// v; v = 0 switches the error model off so the point equals the perfect-CSI run.
ExperimentConfig apply_point(const ExperimentConfig& cfg, SweepVar var, double value);

// Scenario for one Monte Carlo draw. The stream depends on (seed, draw) only, so
// points of a sweep that share dimensions also share geometry and fading.
Scenario draw_scenario(const ExperimentConfig& cfg, std::uint64_t draw);

struct Evaluation {
    double wscsc = 0.0;
    double scc = 0.0;
    double ssc = 0.0;
    double wscsc_std = 0.0;  // spread across CSI error draws, 0 with perfect CSI
};

// Perfect CSI: the objective on the true channels. Otherwise the mean over
// csi.eval_draws errors drawn around the estimate the beams were designed from.
Evaluation evaluate(const ExperimentConfig& cfg, const Scenario& sc, const BeamformerSet& beams, std::uint64_t draw);

struct TrainedModel {
    gnn::GnnParams params;
    std::vector<gnn::TraceRow> trace;
};

// Fresh network trained for `draw`. Scenario mode optimizes on the draw's own
// estimated channels; distribution mode draws new scenarios every step.
TrainedModel train_model(const ExperimentConfig& cfg, const Scenario& sc, std::uint64_t draw);

struct SchemeResult {
    std::string scheme;
    Evaluation eval;
    double seconds = 0.0;
};

// "gnn" trains then infers; "mrt", "zf", "mmse" run the two-stage baselines.
SchemeResult run_scheme(const ExperimentConfig& cfg, const std::string& scheme, const Scenario& sc, std::uint64_t draw);

struct SweepRow {
    double value = 0.0;
    std::string scheme;
    int draw = 0;
    Evaluation eval;
    double seconds = 0.0;
};

struct Failure {
    std::string where;   // e.g. "power=5 draw=3 scheme=gnn"
    std::string error;
};

struct SweepResult {
    SweepVar var = SweepVar::Power;
    std::uint64_t seed = 0;
    std::vector<SweepRow> rows;  // point-major, then draw, then scheme order
    std::vector<Failure> failures;
    std::size_t expected_rows = 0;
};

// Every (point, draw) is independent; sweep.jobs worker threads share them and
// rows are reassembled in a fixed order, so the CSV does not depend on jobs.
SweepResult run_sweep(const ExperimentConfig& cfg, SweepVar var, std::ostream* log = nullptr);
std::string sweep_csv(const SweepResult& r);
std::string sweep_timing_csv(const SweepResult& r);

struct ConvergeSeries {
    int n_bs = 0;
    double kappa = 0.0;
    std::vector<gnn::TraceRow> trace;
};

struct ConvergeResult {
    std::vector<ConvergeSeries> series;
    std::vector<Failure> failures;
};

ConvergeResult run_convergence(const ExperimentConfig& cfg, std::ostream* log = nullptr);
std::string converge_csv(const ConvergeResult& r);

struct LatencyRow {
    fpga::LatencyReport report;
    double median_rel_delta = 0.0;  // fixed-point vs float WSCSC over accuracy draws
    double max_rel_delta = 0.0;
};

std::vector<LatencyRow> run_latency(const ExperimentConfig& cfg, const gnn::GnnParams& params,
                                    std::ostream* log = nullptr);
std::string latency_csv(const std::vector<LatencyRow>& rows);

// ---- files -------------------------------------------------------------------

std::string format_number(double x);
// Writes via a temporary file and rename; creates parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);
// {"command", "code_version", "seed", "config_hash", extra..., "config"} as JSON.
std::string metadata_json(const ExperimentConfig& cfg, const std::string& command, const std::string& extra_json = "{}");

// ---- commands ----------------------------------------------------------------
// out_dir is the run root; each command writes into its own subdirectory
// (train/, converge/, sweep/, latency/, plots/). The return value is the exit
// status: 0 on full success, 1 when some unit failed (listed in the metadata).

int command_train(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);
int command_converge(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);
int command_sweep(const ExperimentConfig& cfg, SweepVar var, const std::filesystem::path& out_dir, std::ostream& log);
int command_latency(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);
int command_plot(const std::vector<std::filesystem::path>& csv_files, const std::filesystem::path& out_dir,
                 std::ostream& log);

}  // namespace isac::experiment
