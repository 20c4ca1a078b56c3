#include "jamdet/ad/optim.hpp"

#include "jamdet/error.hpp"

#include <cmath>

namespace jamdet::ad {

std::string to_string(OptimizerKind kind) {
    switch (kind) {
        case OptimizerKind::Adam: return "adam";
        case OptimizerKind::Adagrad: return "adagrad";
        case OptimizerKind::Sgd: return "sgd";
    }
    return "?";
}

OptimizerKind parse_optimizer_kind(const std::string& name) {
    if (name == "adam") return OptimizerKind::Adam;
    if (name == "adagrad") return OptimizerKind::Adagrad;
    if (name == "sgd") return OptimizerKind::Sgd;
    throw DomainError("unknown optimizer '" + name + "' (expected adam, adagrad or sgd)");
}

Optimizer::Optimizer(OptimizerConfig config, std::vector<Tensor> params)
    : config_(config), params_(std::move(params)) {
    if (!(config_.learning_rate > 0.0)) throw DomainError("learning rate must be positive");
    for (const auto& p : params_) {
        if (!p.is_leaf() || !p.requires_grad()) throw DomainError("optimizer parameters must be trainable leaves");
        m_.emplace_back(p.numel(), 0.0);
        v_.emplace_back(p.numel(), 0.0);
    }
}

void Optimizer::zero_grad() {
    for (auto& p : params_) p.zero_grad();
}

void Optimizer::step() {
    for (const auto& p : params_)
        for (double g : p.grad())
            if (!std::isfinite(g)) throw NumericError("non-finite gradient; optimizer step aborted");

    ++t_;
    const double lr = config_.learning_rate;
    const double eps = config_.epsilon;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        auto& p = params_[i];
        if (!p.has_grad()) continue;
        const auto g = p.grad();
        auto w = p.mutable_values();
        auto& m = m_[i];
        auto& v = v_[i];
        switch (config_.kind) {
            case OptimizerKind::Adam:
                for (std::size_t j = 0; j < w.size(); ++j) {
                    m[j] = config_.beta1 * m[j] + (1.0 - config_.beta1) * g[j];
                    v[j] = config_.beta2 * v[j] + (1.0 - config_.beta2) * g[j] * g[j];
                    w[j] -= lr * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + eps);
                }
                break;
            case OptimizerKind::Adagrad:
                for (std::size_t j = 0; j < w.size(); ++j) {
                    v[j] += g[j] * g[j];
                    w[j] -= lr * g[j] / (std::sqrt(v[j]) + eps);
                }
                break;
            case OptimizerKind::Sgd:
                for (std::size_t j = 0; j < w.size(); ++j) w[j] -= lr * g[j];
                break;
        }
    }
}

}  // namespace jamdet::ad
