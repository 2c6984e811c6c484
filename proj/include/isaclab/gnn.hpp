#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "isaclab/autodiff.hpp"
#include "isaclab/channel.hpp"
#include "isaclab/metrics.hpp"
#include "isaclab/optim.hpp"

namespace isac::gnn {

struct GnnConfig {
    SystemDims dims;          // antenna / RF-chain counts; I and J only bound what a forward accepts
    int hidden = 512;         // input MLP hidden width
    int embed = 256;          // node embedding width
    int conv_hidden = 256;    // hidden width of both conv MLPs
    int conv_layers = 2;
    bool shared_weights = false;  // one network reused by every BS
    bool normalize_inputs = true; // divide each BS's features by their RMS (com and sen separately)
    double analog_init_scale = 0.01;  // multiplies the He-uniform analog head weights
    bool analog_bias_uniform = true;  // analog head bias ~ U(-pi, pi) instead of zero

    int com_input() const { return 2 * dims.n_tx * dims.n_user_ant; }
    int sen_input() const { return 2 * dims.n_tx * dims.n_radar_ant; }
    int digital_output() const { return 2 * dims.n_rf; }
    int analog_output() const { return dims.n_tx * dims.n_rf; }
    void validate() const;
};

struct Linear {
    ad::Parameter weight;  // in x out
    ad::Parameter bias;    // 1 x out
};

// Fully connected stack; ReLU after every layer except where a caller opts out.
struct Mlp {
    std::vector<Linear> layers;
};

struct ConvLayer {
    Mlp neighbor;  // embed -> conv_hidden -> embed
    Mlp combine;   // 2*embed -> conv_hidden -> embed
};

struct BsNetwork {
    Mlp com;
    Mlp sen;
    std::vector<ConvLayer> conv;
    Linear digital;  // embed -> 2N
    Linear analog;   // embed -> N_t N

    std::vector<ad::Parameter*> parameters();
    std::size_t parameter_count() const;
};

struct GnnParams {
    GnnConfig config;
    std::uint64_t seed = 0;
    std::vector<BsNetwork> networks;  // one per BS, or a single shared one

    BsNetwork& network(std::size_t m) { return networks[config.shared_weights ? 0 : m]; }
    const BsNetwork& network(std::size_t m) const { return networks[config.shared_weights ? 0 : m]; }
    std::vector<ad::Parameter*> parameters();
    std::size_t parameter_count() const;
};

// He-uniform weights and zero biases, except for the analog head (see GnnConfig).
GnnParams init_params(const GnnConfig& config, std::uint64_t seed);

// ---- stages ------------------------------------------------------------------

struct NodeFeatures {
    std::size_t n_users = 0;
    std::size_t n_targets = 0;
    ad::Tensor com;  // I x 2 N_t N_u, valid when n_users > 0
    ad::Tensor sen;  // J x 2 N_t N_r, valid when n_targets > 0
};

// Row i holds H_com[m][i] as the row-major flattening of [Re H | Im H].
NodeFeatures build_node_features(const ChannelSet& ch, std::size_t m, bool normalize = false);
// Inverse of one feature row.
CMatrix unflatten_row(std::span<const double> row, int rows, int cols);

ad::Var mlp_forward(ad::Tape& tape, Mlp& mlp, ad::Var x, bool relu_last = true);
ad::Var linear_forward(ad::Tape& tape, Linear& layer, ad::Var x);

// (I+J) x embed rows, users first.
ad::Var embed(ad::Tape& tape, BsNetwork& net, const NodeFeatures& features);
// Appends the column mean of all rows as one extra row.
ad::Var append_mean_node(const ad::Var& z);
// out_k = MLP_c([z_k | max_{k' != k} MLP_n(z_k')]). Needs at least two rows.
ad::Var graph_conv(ad::Tape& tape, ConvLayer& layer, const ad::Var& z);

struct HeadOutputs {
    ad::Var digital;  // (rows-1) x 2N
    ad::Var analog;   // 1 x N_t N
};
HeadOutputs output_heads(ad::Tape& tape, BsNetwork& net, const ad::Var& z);

// Raw values are phases; F(n_t, n) = exp(j raw[n_t * N + n]).
ad::CVar normalize_analog(const ad::Var& raw, int n_tx, int n_rf);

struct DigitalOutput {
    ad::CVar w;  // N x (I+J)
    bool degenerate = false;
};
// Row k -> column k with real parts first; all columns share one scale so that
// the BS transmits exactly `power`.
DigitalOutput normalize_digital(ad::Tape& tape, const ad::Var& raw, const ad::CVar& analog, double power);

struct ForwardResult {
    BeamformerVars beams;
    std::vector<bool> degenerate;  // per BS
};

ForwardResult forward(ad::Tape& tape, GnnParams& params, const ChannelSet& ch, double power);
// Value-only forward (no tape recorded).
BeamformerSet forward_values(const GnnParams& params, const ChannelSet& ch, double power);

// ---- loss and training -------------------------------------------------------

// One training sample: the network sees `channels`; the objective is evaluated on
// them directly, or averaged over `draws` when imperfect CSI is modelled.
struct LossSample {
    ChannelSet channels;
    std::vector<CsiRealization> draws;
};

struct LossReport {
    double loss = 0.0;  // -(1/T) sum_t WSCSC(t)
    double wscsc = 0.0;
    double scc = 0.0;
    double ssc = 0.0;
    std::size_t degenerate = 0;
};

// Evaluates the loss over the batch. With accumulate_grad the gradient is added
// into each Parameter::grad.
LossReport evaluate_loss(GnnParams& params, std::span<const LossSample> batch, const ObjectiveSetup& setup,
                         bool accumulate_grad);

enum class TrainMode { Scenario, Distribution };
TrainMode parse_train_mode(const std::string& name);
std::string to_string(TrainMode mode);

struct TrainConfig {
    int iterations = 200;
    int samples_per_iteration = 1;  // T
    int steps_per_epoch = 1;        // optimizer steps that make up one epoch in the trace
    double learning_rate = 1e-3;  // peak rate
    int warmup = 0;                // linear ramp over the first `warmup` steps
    double final_lr_fraction = 1.0; // cosine decay from the peak to this fraction at the last step
    ad::OptimizerKind optimizer = ad::OptimizerKind::Adam;
    std::uint64_t seed = 1;
    CsiErrorSpec csi;
    int error_draws = 1;
    TrainMode mode = TrainMode::Scenario;

    void validate() const;
    double rate_at(int step) const;  // 0-based step
};

struct TraceRow {
    int iteration = 0;  // 1-based optimizer step
    int epoch = 0;
    double learning_rate = 0.0;
    double loss = 0.0;
    double wscsc = 0.0;
    double scc = 0.0;
    double ssc = 0.0;
};

// Supplies the channels the network sees for (iteration, sample). Scenario mode
// returns the same set every time; distribution mode draws fresh ones.
using ChannelSampler = std::function<ChannelSet(std::size_t iteration, std::size_t sample)>;

struct TrainResult {
    std::vector<TraceRow> trace;
};

// Runs train.iterations optimizer steps in place on `params`. Errors around the
// sampled estimate are drawn from train.csi for every step. Throws TrainingError
// (with the trace so far in the message) if the loss stops being finite.
TrainResult train(GnnParams& params, const TrainConfig& train, const ObjectiveSetup& setup,
                  const ChannelSampler& sampler);

struct InferResult {
    BeamformerSet beams;
    SinrReport report;
};

InferResult infer(const GnnParams& params, const ChannelSet& ch, const ObjectiveSetup& setup);

}  // namespace isac::gnn
