#pragma once

#include "jamdet/ad/tensor.hpp"

#include <string>
#include <vector>

namespace jamdet::ad {

enum class OptimizerKind { Adam, Adagrad, Sgd };

std::string to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(const std::string& name);

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::Adam;
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Updates leaf tensors from their accumulated .grad:
//   Adam     bias-corrected first/second moments
//   Adagrad  accumulated squared gradients, zero initial accumulator
//   SGD      plain gradient step
// A step that sees any non-finite gradient throws NumericError and leaves
// both parameters and optimizer state untouched.
class Optimizer {
public:
    Optimizer(OptimizerConfig config, std::vector<Tensor> params);

    void step();
    void zero_grad();

    const OptimizerConfig& config() const { return config_; }
    std::size_t steps() const { return t_; }
    const std::vector<std::vector<double>>& first_moments() const { return m_; }
    const std::vector<std::vector<double>>& second_moments() const { return v_; }

private:
    OptimizerConfig config_;
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    std::size_t t_ = 0;
};

}  // namespace jamdet::ad
