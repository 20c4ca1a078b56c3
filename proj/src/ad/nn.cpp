#include "jamdet/ad/nn.hpp"

#include <cmath>

namespace jamdet::ad {

std::vector<Tensor> trainable(const ParameterList& params) {
    std::vector<Tensor> out;
    for (const auto& p : params)
        if (p.trainable) out.push_back(p.tensor);
    return out;
}

ParameterList deep_copy(const ParameterList& params) {
    ParameterList out;
    out.reserve(params.size());
    for (const auto& p : params) out.push_back({p.name, p.tensor.clone(), p.trainable});
    return out;
}

Tensor glorot_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    std::vector<double> v(numel(shape));
    for (auto& x : v) x = dist(rng);
    return Tensor::from(std::move(shape), std::move(v), true);
}

Conv1d::Conv1d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, std::size_t stride_,
               std::size_t padding_, std::mt19937_64& rng)
    : weight(glorot_uniform({out_channels, in_channels, kernel}, in_channels * kernel, out_channels * kernel, rng)),
      bias(Tensor::zeros({out_channels}, true)),
      stride(stride_),
      padding(padding_) {}

Tensor Conv1d::forward(const Tensor& x) const { return add_channel_bias(conv1d(x, weight, stride, padding), bias); }

std::size_t Conv1d::output_length(std::size_t in_length) const {
    return conv1d_output_length(in_length, weight.size(2), stride, padding);
}

void Conv1d::collect(const std::string& prefix, ParameterList& out) const {
    out.push_back({prefix + ".weight", weight, true});
    out.push_back({prefix + ".bias", bias, true});
}

ConvTranspose1d::ConvTranspose1d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
                                 std::size_t stride_, std::size_t padding_, std::size_t output_padding_,
                                 std::mt19937_64& rng)
    : weight(glorot_uniform({in_channels, out_channels, kernel}, in_channels * kernel, out_channels * kernel, rng)),
      bias(Tensor::zeros({out_channels}, true)),
      stride(stride_),
      padding(padding_),
      output_padding(output_padding_) {}

Tensor ConvTranspose1d::forward(const Tensor& x) const {
    return add_channel_bias(conv1d_transpose(x, weight, stride, padding, output_padding), bias);
}

std::size_t ConvTranspose1d::output_length(std::size_t in_length) const {
    return conv1d_transpose_output_length(in_length, weight.size(2), stride, padding, output_padding);
}

void ConvTranspose1d::collect(const std::string& prefix, ParameterList& out) const {
    out.push_back({prefix + ".weight", weight, true});
    out.push_back({prefix + ".bias", bias, true});
}

Dense::Dense(std::size_t in_features, std::size_t out_features, std::mt19937_64& rng)
    : weight(glorot_uniform({out_features, in_features}, in_features, out_features, rng)),
      bias(Tensor::zeros({out_features}, true)) {}

void Dense::collect(const std::string& prefix, ParameterList& out) const {
    out.push_back({prefix + ".weight", weight, true});
    out.push_back({prefix + ".bias", bias, true});
}

BatchNorm1d::BatchNorm1d(std::size_t channels, double momentum_, double eps_)
    : gamma(Tensor::full({channels}, 1.0, true)),
      beta(Tensor::zeros({channels}, true)),
      running_mean(Tensor::zeros({channels})),
      running_var(Tensor::full({channels}, 1.0)),
      momentum(momentum_),
      eps(eps_) {}

Tensor BatchNorm1d::forward(const Tensor& x, bool train) {
    const std::size_t B = x.size(0), L = x.size(2);
    if (!train) {
        std::vector<double> inv(running_var.numel()), shift(running_var.numel());
        for (std::size_t c = 0; c < inv.size(); ++c) {
            inv[c] = 1.0 / std::sqrt(running_var[c] + eps);
            shift[c] = -running_mean[c] * inv[c];
        }
        const Tensor inv_t = Tensor::from(running_var.shape(), std::move(inv));
        const Tensor shift_t = Tensor::from(running_var.shape(), std::move(shift));
        // gamma * (x - mean) / sqrt(var + eps) + beta
        const Tensor norm = add(mul_const(x, channel_broadcast(inv_t, B, L)), channel_broadcast(shift_t, B, L));
        return add(mul(norm, channel_broadcast(gamma, B, L)), channel_broadcast(beta, B, L));
    }

    const double n = static_cast<double>(B * L);
    const Tensor mu = scale(channel_sum(x), 1.0 / n);
    const Tensor centered = sub(x, channel_broadcast(mu, B, L));
    const Tensor var = scale(channel_sum(square(centered)), 1.0 / n);
    const Tensor inv_std = reciprocal(sqrt(add_scalar(var, eps)));
    const Tensor y = mul(centered, channel_broadcast(mul(inv_std, gamma), B, L));

    auto rm = running_mean.mutable_values();
    auto rv = running_var.mutable_values();
    const double unbias = n > 1.0 ? n / (n - 1.0) : 1.0;
    for (std::size_t c = 0; c < rm.size(); ++c) {
        rm[c] = momentum * rm[c] + (1.0 - momentum) * mu[c];
        rv[c] = momentum * rv[c] + (1.0 - momentum) * var[c] * unbias;
    }
    return add(y, channel_broadcast(beta, B, L));
}

void BatchNorm1d::collect(const std::string& prefix, ParameterList& out) const {
    out.push_back({prefix + ".gamma", gamma, true});
    out.push_back({prefix + ".beta", beta, true});
    out.push_back({prefix + ".running_mean", running_mean, false});
    out.push_back({prefix + ".running_var", running_var, false});
}

}  // namespace jamdet::ad
