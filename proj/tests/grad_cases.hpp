#pragma once

// Finite-difference catalogue shared by the unit tests and the acceptance
// run: one relative error per differentiable op, and the second-order check
// of the gradient penalty.

#include "gradcheck.hpp"

#include "jamdet/ad/nn.hpp"
#include "jamdet/ad/penalty.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace grad_cases {

using namespace jamdet::ad;

// Weighted sum with fixed random weights so every output element matters.
inline Tensor probe(const Tensor& y, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const Tensor w = gradcheck::random_tensor(y.shape(), rng, -1.0, 1.0, false);
    return sum(mul(y, w));
}

inline std::vector<std::pair<std::string, double>> op_errors(std::uint64_t seed) {
    std::vector<std::pair<std::string, double>> out;
    std::mt19937_64 rng(seed);
    Tensor a = gradcheck::random_tensor({3, 4}, rng);
    Tensor b = gradcheck::random_tensor({3, 4}, rng);
    out.push_back({"add", gradcheck::max_relative_error([&] { return probe(add(a, b), seed); }, {a, b})});
    out.push_back({"sub", gradcheck::max_relative_error([&] { return probe(sub(a, b), seed); }, {a, b})});
    out.push_back({"mul", gradcheck::max_relative_error([&] { return probe(mul(a, b), seed); }, {a, b})});
    out.push_back({"scale/add_scalar", gradcheck::max_relative_error([&] { return probe(scale(add_scalar(a, 0.3), -1.7), seed); }, {a})});
    out.push_back({"square", gradcheck::max_relative_error([&] { return probe(square(a), seed); }, {a})});
    out.push_back({"tanh", gradcheck::max_relative_error([&] { return probe(jamdet::ad::tanh(a), seed); }, {a})});
    out.push_back({"sigmoid", gradcheck::max_relative_error([&] { return probe(sigmoid(a), seed); }, {a})});
    out.push_back({"mean", gradcheck::max_relative_error([&] { return mean(a); }, {a})});
    out.push_back({"mse", gradcheck::max_relative_error([&] { return mse(a, b); }, {a, b})});
    out.push_back({"transpose", gradcheck::max_relative_error([&] { return probe(transpose(a), seed); }, {a})});

    Tensor pos = gradcheck::random_tensor({3, 4}, rng, 0.2, 2.0);
    out.push_back({"sqrt", gradcheck::max_relative_error([&] { return probe(jamdet::ad::sqrt(pos), seed); }, {pos})});
    out.push_back({"log", gradcheck::max_relative_error([&] { return probe(jamdet::ad::log(pos), seed); }, {pos})});
    out.push_back({"reciprocal", gradcheck::max_relative_error([&] { return probe(reciprocal(pos), seed); }, {pos})});

    Tensor kink = gradcheck::random_away_from_zero({3, 4}, rng);
    out.push_back({"relu", gradcheck::max_relative_error([&] { return probe(relu(kink), seed); }, {kink})});
    out.push_back({"leaky_relu", gradcheck::max_relative_error([&] { return probe(leaky_relu(kink, 0.2), seed); }, {kink})});
    out.push_back({"clamp", gradcheck::max_relative_error([&] { return probe(clamp(kink, -0.5, 0.5), seed); }, {kink})});
    out.push_back({"dropout", gradcheck::max_relative_error([&] { return probe(dropout(kink, 0.5, seed, true), seed); }, {kink})});

    Tensor prob = gradcheck::random_tensor({6}, rng, 0.05, 0.95);
    std::vector<double> labels(6);
    for (std::size_t i = 0; i < 6; ++i) labels[i] = static_cast<double>(i % 2);
    const Tensor target = Tensor::from({6}, labels);
    out.push_back({"bce", gradcheck::max_relative_error([&] { return bce(prob, target); }, {prob})});

    Tensor m1 = gradcheck::random_tensor({3, 5}, rng);
    Tensor m2 = gradcheck::random_tensor({5, 2}, rng);
    out.push_back({"matmul", gradcheck::max_relative_error([&] { return probe(matmul(m1, m2), seed); }, {m1, m2})});

    Tensor dx = gradcheck::random_tensor({4, 5}, rng);
    Tensor dw = gradcheck::random_tensor({3, 5}, rng);
    Tensor db = gradcheck::random_tensor({3}, rng);
    out.push_back({"dense", gradcheck::max_relative_error([&] { return probe(dense(dx, dw, db), seed); }, {dx, dw, db})});

    const std::size_t stride = 1 + seed % 2, pad = seed % 3 == 0 ? 0 : 1;
    Tensor cx = gradcheck::random_tensor({2, 3, 9}, rng);
    Tensor cw = gradcheck::random_tensor({4, 3, 3}, rng);
    Tensor cb = gradcheck::random_tensor({4}, rng);
    out.push_back({"conv1d", gradcheck::max_relative_error([&] { return probe(add_channel_bias(conv1d(cx, cw, stride, pad), cb), seed); },
                             {cx, cw, cb})});

    const std::size_t out_pad = stride > 1 ? 1 : 0;
    Tensor tx = gradcheck::random_tensor({2, 4, 5}, rng);
    Tensor tw = gradcheck::random_tensor({4, 3, 3}, rng);
    out.push_back({"conv1d_transpose", gradcheck::max_relative_error([&] { return probe(conv1d_transpose(tx, tw, stride, pad, out_pad), seed); },
                             {tx, tw})});

    Tensor gx = gradcheck::random_tensor({2, 4, 9}, rng);
    Tensor gy = gradcheck::random_tensor({2, 3, conv1d_output_length(9, 3, stride, pad)}, rng);
    out.push_back({"conv1d_weight_grad", gradcheck::max_relative_error([&] { return probe(conv1d_weight_grad(gx, gy, stride, pad, 3), seed); },
                             {gx, gy})});

    Tensor bx = gradcheck::random_tensor({4, 3, 6}, rng, -2.0, 2.0);
    BatchNorm1d bn(3);
    bn.gamma.mutable_values()[1] = 1.7;
    bn.beta.mutable_values()[2] = -0.4;
    out.push_back({"batchnorm", gradcheck::max_relative_error([&] { return probe(bn.forward(bx, true), seed); }, {bx, bn.gamma, bn.beta})});

    Tensor sx = gradcheck::random_tensor({2, 5, 3}, rng);
    Tensor sy = gradcheck::random_tensor({2, 2, 3}, rng);
    out.push_back({"slice/concat_channels", gradcheck::max_relative_error([&] { return probe(concat_channels(slice_channels(sx, 1, 3), sy), seed); },
                             {sx, sy})});
    out.push_back({"row_sum", gradcheck::max_relative_error([&] { return probe(row_sum(square(sx)), seed); }, {sx})});
    return out;
}

// D(x) = v . tanh(W x + b) + c, one scalar per row.
struct TwoLayerCritic {
    Tensor w, b, v, c;

    explicit TwoLayerCritic(std::mt19937_64& rng)
        : w(gradcheck::random_tensor({5, 4}, rng)),
          b(gradcheck::random_tensor({5}, rng)),
          v(gradcheck::random_tensor({1, 5}, rng)),
          c(gradcheck::random_tensor({1}, rng)) {}

    Tensor operator()(const Tensor& x) const { return dense(jamdet::ad::tanh(dense(x, w, b)), v, c); }
};

// Relative error of d(penalty)/d(critic parameters) through double backprop.
inline double penalty_second_order_error(std::uint64_t seed) {
    std::mt19937_64 rng(100 + seed);
    TwoLayerCritic critic(rng);
    const Tensor x = gradcheck::random_tensor({3, 4}, rng, -1, 1, false);
    const auto loss = [&] { return input_gradient_penalty([&](const Tensor& in) { return critic(in); }, x).penalty; };
    return gradcheck::max_relative_error(loss, {critic.w, critic.b, critic.v, critic.c});
}

}  // namespace grad_cases
