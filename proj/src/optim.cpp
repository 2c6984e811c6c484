#include "isaclab/optim.hpp"

#include <cmath>

#include "isaclab/errors.hpp"

namespace isac::ad {

OptimizerKind parse_optimizer(const std::string& name) {
    if (name == "sgd") return OptimizerKind::Sgd;
    if (name == "adam") return OptimizerKind::Adam;
    throw ConfigError("unknown optimizer '" + name + "' (expected sgd or adam)");
}

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::Sgd ? "sgd" : "adam"; }

Optimizer::Optimizer(OptimizerKind kind, double learning_rate, AdamHyper hyper)
    : kind_(kind), lr_(learning_rate), hyper_(hyper) {
    if (!(learning_rate >= 0.0)) throw ConfigError("learning rate must be >= 0");
}

void Optimizer::set_learning_rate(double lr) {
    if (!(lr >= 0.0)) throw ConfigError("learning rate must be >= 0");
    lr_ = lr;
}

void Optimizer::step(std::span<Parameter* const> params) {
    for (const auto* p : params) {
        if (!p->grad.all_finite()) throw TrainingError("non-finite gradient in parameter '" + p->name + "'");
    }
    ++t_;
    if (kind_ == OptimizerKind::Sgd) {
        for (auto* p : params) {
            double* v = p->value.data().data();
            const double* g = p->grad.data().data();
            for (std::size_t i = 0; i < p->value.size(); ++i) v[i] -= lr_ * g[i];
            p->zero_grad();
        }
        return;
    }
    if (m_.size() != params.size()) {
        m_.clear();
        v_.clear();
        for (const auto* p : params) {
            m_.emplace_back(p->value.shape(), 0.0);
            v_.emplace_back(p->value.shape(), 0.0);
        }
    }
    const double b1 = hyper_.beta1, b2 = hyper_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto* p = params[k];
        double* __restrict val = p->value.data().data();
        const double* __restrict grad = p->grad.data().data();
        double* __restrict m = m_[k].data().data();
        double* __restrict v = v_[k].data().data();
        const double eps = hyper_.eps, step = lr_ / c1, isc2 = 1.0 / std::sqrt(c2);
        const std::size_t n = p->value.size();
        for (std::size_t i = 0; i < n; ++i) {
            const double g = grad[i];
            m[i] = b1 * m[i] + (1.0 - b1) * g;
            v[i] = b2 * v[i] + (1.0 - b2) * g * g;
            val[i] -= step * m[i] / (std::sqrt(v[i]) * isc2 + eps);
        }
        p->zero_grad();
    }
}

}  // namespace isac::ad
