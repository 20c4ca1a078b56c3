#pragma once

// Central finite-difference oracle for the autodiff engine. Test-only: the
// numeric side never touches gradients(), only forward evaluations.

#include "jamdet/ad/ops.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace gradcheck {

using jamdet::ad::Tensor;

inline Tensor random_tensor(jamdet::ad::Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0,
                            bool requires_grad = true) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(jamdet::ad::numel(shape));
    for (auto& x : v) x = d(rng);
    return Tensor::from(std::move(shape), std::move(v), requires_grad);
}

// Values bounded away from 0 by `margin` so kinks at 0 are not straddled.
inline Tensor random_away_from_zero(jamdet::ad::Shape shape, std::mt19937_64& rng, double margin = 0.05) {
    std::uniform_real_distribution<double> d(margin, 1.0);
    std::bernoulli_distribution sign(0.5);
    std::vector<double> v(jamdet::ad::numel(shape));
    for (auto& x : v) x = sign(rng) ? d(rng) : -d(rng);
    return Tensor::from(std::move(shape), std::move(v), true);
}

// ||analytic - numeric|| / max(||analytic||, ||numeric||, floor)
inline double relative_error(const std::vector<double>& a, const std::vector<double>& n, double floor = 1e-8) {
    double diff = 0.0, na = 0.0, nn = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += (a[i] - n[i]) * (a[i] - n[i]);
        na += a[i] * a[i];
        nn += n[i] * n[i];
    }
    return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nn), floor});
}

inline std::vector<double> numeric_gradient(const std::function<double()>& f, Tensor& param, double h = 1e-5) {
    auto values = param.mutable_values();
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double saved = values[i];
        values[i] = saved + h;
        const double up = f();
        values[i] = saved - h;
        const double down = f();
        values[i] = saved;
        out[i] = (up - down) / (2.0 * h);
    }
    return out;
}

// Largest relative error over all `params` between backward() and central
// differences of `loss`.
inline double max_relative_error(const std::function<Tensor()>& loss, std::vector<Tensor> params, double h = 1e-5) {
    for (auto& p : params) p.zero_grad();
    jamdet::ad::backward(loss());
    double worst = 0.0;
    for (auto& p : params) {
        const std::vector<double> analytic(p.grad().begin(), p.grad().end());
        const auto numeric = numeric_gradient(
            [&] {
                jamdet::ad::NoGradGuard no_grad;
                return loss().item();
            },
            p, h);
        worst = std::max(worst, relative_error(analytic, numeric));
    }
    return worst;
}

}  // namespace gradcheck
