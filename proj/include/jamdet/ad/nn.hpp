#pragma once

#include "jamdet/ad/ops.hpp"

#include <random>
#include <string>
#include <vector>

namespace jamdet::ad {

struct NamedTensor {
    std::string name;
    Tensor tensor;
    bool trainable = true;
};

using ParameterList = std::vector<NamedTensor>;

std::vector<Tensor> trainable(const ParameterList& params);
// Leaf copies with identical values and flags, sharing nothing with `params`.
ParameterList deep_copy(const ParameterList& params);

// Glorot-uniform weights, zero biases.
Tensor glorot_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng);

class Conv1d {
public:
    Conv1d() = default;
    Conv1d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, std::size_t stride,
           std::size_t padding, std::mt19937_64& rng);

    Tensor forward(const Tensor& x) const;
    std::size_t output_length(std::size_t in_length) const;
    void collect(const std::string& prefix, ParameterList& out) const;

    Tensor weight;  // [out, in, kernel]
    Tensor bias;    // [out]
    std::size_t stride = 1;
    std::size_t padding = 0;
};

class ConvTranspose1d {
public:
    ConvTranspose1d() = default;
    ConvTranspose1d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, std::size_t stride,
                    std::size_t padding, std::size_t output_padding, std::mt19937_64& rng);

    Tensor forward(const Tensor& x) const;
    std::size_t output_length(std::size_t in_length) const;
    void collect(const std::string& prefix, ParameterList& out) const;

    Tensor weight;  // [in, out, kernel]
    Tensor bias;    // [out]
    std::size_t stride = 1;
    std::size_t padding = 0;
    std::size_t output_padding = 0;
};

class Dense {
public:
    Dense() = default;
    Dense(std::size_t in_features, std::size_t out_features, std::mt19937_64& rng);

    Tensor forward(const Tensor& x) const { return dense(x, weight, bias); }
    void collect(const std::string& prefix, ParameterList& out) const;

    Tensor weight;  // [out, in]
    Tensor bias;    // [out]
};

// Batch normalization over (batch, length) per channel of a [B, C, L] input.
// Training normalizes with batch statistics and updates the running ones as
// running = momentum * running + (1 - momentum) * batch (unbiased variance).
class BatchNorm1d {
public:
    BatchNorm1d() = default;
    explicit BatchNorm1d(std::size_t channels, double momentum = 0.9, double eps = 1e-5);

    Tensor forward(const Tensor& x, bool train);
    void collect(const std::string& prefix, ParameterList& out) const;

    Tensor gamma;
    Tensor beta;
    Tensor running_mean;
    Tensor running_var;
    double momentum = 0.9;
    double eps = 1e-5;
};

}  // namespace jamdet::ad
