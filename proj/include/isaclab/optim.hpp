#pragma once

#include <span>
#include <string>
#include <vector>

#include "isaclab/autodiff.hpp"

namespace isac::ad {

enum class OptimizerKind { Sgd, Adam };

OptimizerKind parse_optimizer(const std::string& name);
std::string to_string(OptimizerKind kind);

struct AdamHyper {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Updates parameters in place from their accumulated gradients, then zeroes the
// gradients. A non-finite gradient aborts the step with a TrainingError naming
// the parameter; no parameter is modified in that case.
class Optimizer {
public:
    Optimizer(OptimizerKind kind, double learning_rate, AdamHyper hyper = {});

    void step(std::span<Parameter* const> params);

    OptimizerKind kind() const { return kind_; }
    double learning_rate() const { return lr_; }
    void set_learning_rate(double lr);
    long steps() const { return t_; }

private:
    OptimizerKind kind_;
    double lr_;
    AdamHyper hyper_;
    long t_ = 0;
    std::vector<Tensor> m_, v_;
};

}  // namespace isac::ad
