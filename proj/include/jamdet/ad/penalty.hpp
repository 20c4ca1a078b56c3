#pragma once

#include "jamdet/ad/tensor.hpp"

#include <functional>
#include <vector>

namespace jamdet::ad {

struct InputGradientPenalty {
    // mean over rows of (||d net(x_row) / d x_row||_2 - 1)^2, recorded so that
    // backward() on it yields the parameter gradient of the penalty.
    Tensor penalty;
    // Per-row input-gradient norms.
    std::vector<double> norms;
    // Rows whose gradient norm was exactly 0; their norm subgradient is taken as 0.
    std::size_t zero_norm_rows = 0;
};

// `net` maps a [B, ...] batch to [B, 1] (one scalar per row, rows independent).
// The input gradient is obtained from one recorded backward pass through
// `net`, so the returned penalty is differentiable with respect to every
// parameter `net` closes over.
InputGradientPenalty input_gradient_penalty(const std::function<Tensor(const Tensor&)>& net, const Tensor& x);

}  // namespace jamdet::ad
