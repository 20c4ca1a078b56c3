#pragma once

#include "jamdet/ad/tensor.hpp"

#include <cstdint>

namespace jamdet::ad {

// Element-wise, identical shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor neg(const Tensor& a);
Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double offset);
Tensor square(const Tensor& a);
// sqrt with derivative 0 where the input is exactly 0.
Tensor sqrt(const Tensor& a);
// 1/a with derivative 0 where a is exactly 0 (and value 0 there).
Tensor reciprocal(const Tensor& a);
Tensor log(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double slope);
Tensor clamp(const Tensor& a, double lo, double hi);
// a * mask where mask is a constant (never differentiated).
Tensor mul_const(const Tensor& a, const Tensor& mask);

// Inverted dropout: keeps each element with probability 1-p and rescales by
// 1/(1-p). Identity when !train or p == 0.
Tensor dropout(const Tensor& a, double p, std::uint64_t seed, bool train);

// Reductions to shape [1].
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
// Broadcast a [1] tensor to `shape`.
Tensor expand(const Tensor& scalar, const Shape& shape);

// Layout.
Tensor reshape(const Tensor& a, Shape shape);
Tensor transpose(const Tensor& a);  // 2-D only
// [B, C, L] -> [C]: sum over batch and length.
Tensor channel_sum(const Tensor& a);
// [C] -> [B, C, L].
Tensor channel_broadcast(const Tensor& v, std::size_t batch, std::size_t length);
// [B, ...] -> [B]: sum of every row.
Tensor row_sum(const Tensor& a);
// [B] -> [B, rest...].
Tensor row_broadcast(const Tensor& v, const Shape& shape);
// [B, C, L] -> [B, count, L] starting at channel `start`.
Tensor slice_channels(const Tensor& a, std::size_t start, std::size_t count);
// [B, C, L] -> [B, total, L], a placed at channel `start`, zeros elsewhere.
Tensor pad_channels(const Tensor& a, std::size_t start, std::size_t total);
Tensor concat_channels(const Tensor& a, const Tensor& b);

// Linear algebra.
Tensor matmul(const Tensor& a, const Tensor& b);  // [m,k] x [k,n]
// x [B,N], weight [M,N], bias [M] -> [B,M].
Tensor dense(const Tensor& x, const Tensor& weight, const Tensor& bias);

// 1-D convolution. x [B,C,L], weight [O,C,K] -> [B,O,(L+2p-K)/s+1].
Tensor conv1d(const Tensor& x, const Tensor& weight, std::size_t stride, std::size_t padding);
// Adjoint of conv1d with respect to its input. y [B,O,Lout], weight [O,C,K]
// -> [B,C,in_length]. Used both as the transposed-convolution layer and by
// conv1d's backward pass.
Tensor conv1d_input_grad(const Tensor& y, const Tensor& weight, std::size_t stride, std::size_t padding,
                         std::size_t in_length);
// Adjoint of conv1d with respect to its weight. x [B,C,L], y [B,O,Lout] -> [O,C,K].
Tensor conv1d_weight_grad(const Tensor& x, const Tensor& y, std::size_t stride, std::size_t padding,
                          std::size_t kernel);
// Transposed convolution layer. x [B,Cin,L], weight [Cin,Cout,K]
// -> [B,Cout,(L-1)s - 2p + K + output_padding].
Tensor conv1d_transpose(const Tensor& x, const Tensor& weight, std::size_t stride, std::size_t padding,
                        std::size_t output_padding = 0);
// Adds bias [C] to every position of x [B,C,L].
Tensor add_channel_bias(const Tensor& x, const Tensor& bias);

std::size_t conv1d_output_length(std::size_t in_length, std::size_t kernel, std::size_t stride, std::size_t padding);
std::size_t conv1d_transpose_output_length(std::size_t in_length, std::size_t kernel, std::size_t stride,
                                           std::size_t padding, std::size_t output_padding);

// Losses, returning [1].
Tensor mse(const Tensor& prediction, const Tensor& target);
// Binary cross-entropy with prediction clamped to [1e-7, 1-1e-7]; target constant.
Tensor bce(const Tensor& prediction, const Tensor& target);

inline constexpr double kBceClamp = 1e-7;

}  // namespace jamdet::ad
