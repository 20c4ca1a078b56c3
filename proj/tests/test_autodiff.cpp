#include "doctest.h"
#include "grad_cases.hpp"
#include "gradcheck.hpp"

#include "jamdet/ad/checkpoint.hpp"
#include "jamdet/ad/nn.hpp"
#include "jamdet/ad/optim.hpp"
#include "jamdet/ad/penalty.hpp"
#include "jamdet/error.hpp"

#include <cmath>
#include <limits>

using namespace jamdet;
using namespace jamdet::ad;
using gradcheck::max_relative_error;
using gradcheck::random_away_from_zero;
using gradcheck::random_tensor;

TEST_CASE("forward definitions") {
    const Tensor x = Tensor::from({2}, {-1.0, 2.0});
    const Tensor r = relu(x);
    CHECK(r[0] == 0.0);
    CHECK(r[1] == 2.0);
    CHECK(mse(x, x).item() == 0.0);

    const Tensor in = Tensor::zeros({1, 1, 8});
    const Tensor w = Tensor::zeros({1, 1, 3});
    CHECK(conv1d(in, w, 1, 0).size(2) == 6);
    CHECK(conv1d_output_length(960, 3, 2, 1) == 480);
    CHECK(conv1d_transpose_output_length(480, 3, 2, 1, 1) == 960);

    const Tensor lr = leaky_relu(x, 0.2);
    CHECK(lr[0] == doctest::Approx(-0.2));
    CHECK(sigmoid(Tensor::scalar(0.0)).item() == 0.5);
    CHECK(ad::tanh(Tensor::scalar(0.0)).item() == 0.0);
}

TEST_CASE("shape mismatch names both shapes") {
    const Tensor a = Tensor::zeros({2, 3});
    const Tensor b = Tensor::zeros({3, 2});
    try {
        add(a, b);
        FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("[2,3]") != std::string::npos);
        CHECK(msg.find("[3,2]") != std::string::npos);
    }
    CHECK_THROWS_AS(conv1d(Tensor::zeros({1, 2, 8}), Tensor::zeros({4, 3, 3}), 1, 0), ShapeError);
}

TEST_CASE("conv1d matches a direct loop") {
    std::mt19937_64 rng(3);
    const Tensor x = random_tensor({2, 3, 11}, rng, -1, 1, false);
    const Tensor w = random_tensor({4, 3, 3}, rng, -1, 1, false);
    const std::size_t stride = 2, pad = 1;
    const Tensor y = conv1d(x, w, stride, pad);
    REQUIRE(y.shape() == Shape{2, 4, 6});
    for (std::size_t b = 0; b < 2; ++b)
        for (std::size_t o = 0; o < 4; ++o)
            for (std::size_t t = 0; t < 6; ++t) {
                double acc = 0.0;
                for (std::size_t c = 0; c < 3; ++c)
                    for (std::size_t k = 0; k < 3; ++k) {
                        const long pos = static_cast<long>(t * stride + k) - static_cast<long>(pad);
                        if (pos >= 0 && pos < 11) acc += w[(o * 3 + c) * 3 + k] * x[(b * 3 + c) * 11 + pos];
                    }
                CHECK(y[(b * 4 + o) * 6 + t] == doctest::Approx(acc).epsilon(1e-12));
            }
}

TEST_CASE("conv1d_transpose is the adjoint of conv1d") {
    // <conv(x, W), y> == <x, conv_transpose(y, W)>
    std::mt19937_64 rng(5);
    const Tensor x = random_tensor({2, 3, 10}, rng, -1, 1, false);
    const Tensor w = random_tensor({4, 3, 3}, rng, -1, 1, false);
    const Tensor y = random_tensor({2, 4, 5}, rng, -1, 1, false);
    const double lhs = sum(mul(conv1d(x, w, 2, 1), y)).item();
    const double rhs = sum(mul(x, conv1d_transpose(y, w, 2, 1, 1))).item();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("basic derivatives") {
    Tensor x = Tensor::scalar(3.0, true);
    backward(square(x));
    CHECK(x.grad()[0] == doctest::Approx(6.0));

    Tensor v = Tensor::from({4}, {1, 2, 3, 4}, true);
    backward(sum(v));
    for (double g : v.grad()) CHECK(g == 1.0);

    // fan-out: d(x + x)/dx = 2
    Tensor f = Tensor::scalar(1.5, true);
    backward(sum(add(f, f)));
    CHECK(f.grad()[0] == 2.0);

    // accumulation without zeroing
    backward(sum(add(f, f)));
    CHECK(f.grad()[0] == 4.0);
    f.zero_grad();
    CHECK(f.grad()[0] == 0.0);

    CHECK_THROWS_AS(backward(v), DomainError);
}

TEST_CASE("finite-difference check of every differentiable op") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        CAPTURE(seed);
        for (const auto& [name, error] : grad_cases::op_errors(seed)) {
            CAPTURE(name);
            CHECK(error <= 1e-5);
        }
    }
}

TEST_CASE("gradient penalty: analytic linear critics") {
    {
        // ||w|| = 1 -> penalty 0, parameter gradient 0
        Tensor w = Tensor::from({1, 3}, {0.6, 0.0, 0.8}, true);
        const Tensor bias = Tensor::zeros({1});
        const Tensor x = Tensor::from({2, 3}, {1, 2, 3, -1, 0, 4});
        const auto gp = input_gradient_penalty([&](const Tensor& in) { return dense(in, w, bias); }, x);
        CHECK(gp.penalty.item() == doctest::Approx(0.0).epsilon(1e-15));
        backward(gp.penalty);
        for (double g : w.grad()) CHECK(std::abs(g) <= 1e-12);
    }
    {
        // ||w|| = 3, lambda = 20 -> 20 * (3 - 1)^2 = 80
        Tensor w = Tensor::from({1, 3}, {1.0, 2.0, 2.0}, true);
        const Tensor bias = Tensor::zeros({1});
        const Tensor x = Tensor::from({2, 3}, {1, 2, 3, -1, 0, 4});
        const auto gp = input_gradient_penalty([&](const Tensor& in) { return dense(in, w, bias); }, x);
        CHECK(std::abs(20.0 * gp.penalty.item() - 80.0) <= 1e-9);
        CHECK(gp.norms[0] == doctest::Approx(3.0));
        // d/dw (||w|| - 1)^2 = 2 (||w|| - 1) w / ||w||
        backward(gp.penalty);
        for (std::size_t i = 0; i < 3; ++i) CHECK(w.grad()[i] == doctest::Approx(2.0 * 2.0 * w[i] / 3.0));
    }
    {
        // zero input gradient -> subgradient 0, counted
        Tensor w = Tensor::zeros({1, 2}, true);
        const Tensor bias = Tensor::zeros({1});
        const auto gp = input_gradient_penalty([&](const Tensor& in) { return dense(in, w, bias); },
                                               Tensor::from({1, 2}, {1, 1}));
        CHECK(gp.zero_norm_rows == 1);
        CHECK(gp.penalty.item() == 1.0);
        backward(gp.penalty);
        for (double g : w.grad()) CHECK(std::isfinite(g));
    }
}

TEST_CASE("gradient penalty: second-order finite-difference check") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        CAPTURE(seed);
        CHECK(grad_cases::penalty_second_order_error(seed) <= 1e-4);
    }
}

TEST_CASE("gradient penalty through a convolutional critic") {
    std::mt19937_64 rng(42);
    Conv1d c1(1, 3, 3, 2, 1, rng);
    Conv1d c2(3, 4, 3, 1, 1, rng);
    Dense head(4 * 4, 1, rng);
    const auto net = [&](const Tensor& in) {
        const std::size_t B = in.size(0);
        Tensor h = leaky_relu(c1.forward(reshape(in, {B, 1, 8})), 0.2);
        h = leaky_relu(c2.forward(h), 0.2);
        return head.forward(reshape(h, {B, 16}));
    };
    const Tensor x = random_tensor({2, 8}, rng, -1, 1, false);
    CHECK(max_relative_error([&] { return input_gradient_penalty(net, x).penalty; },
                             {c1.weight, c1.bias, c2.weight, head.weight}) <= 1e-4);
}

TEST_CASE("dropout and batchnorm evaluation modes") {
    std::mt19937_64 rng(1);
    const Tensor x = random_tensor({3, 2, 4}, rng, -1, 1, false);
    const Tensor d = dropout(x, 0.5, 7, false);
    for (std::size_t i = 0; i < x.numel(); ++i) CHECK(d[i] == x[i]);

    BatchNorm1d bn(2);
    bn.running_var.mutable_values()[0] = 1.0 - bn.eps;
    bn.running_var.mutable_values()[1] = 1.0 - bn.eps;
    const Tensor y = bn.forward(x, false);
    for (std::size_t i = 0; i < x.numel(); ++i) CHECK(y[i] == doctest::Approx(x[i]).epsilon(1e-15));

    // same frozen statistics, same output
    const Tensor y2 = bn.forward(x, false);
    for (std::size_t i = 0; i < x.numel(); ++i) CHECK(y2[i] == y[i]);

    // training mode moves running stats with momentum 0.9
    BatchNorm1d fresh(2);
    fresh.forward(x, true);
    double mean0 = 0.0;
    for (std::size_t b = 0; b < 3; ++b)
        for (std::size_t t = 0; t < 4; ++t) mean0 += x[(b * 2) * 4 + t];
    mean0 /= 12.0;
    CHECK(fresh.running_mean[0] == doctest::Approx(0.1 * mean0));

    CHECK_THROWS_AS(dropout(x, 1.0, 1, true), DomainError);
}

TEST_CASE("optimizers") {
    SUBCASE("adam first step moves by alpha") {
        Tensor p = Tensor::scalar(0.0, true);
        Optimizer opt({OptimizerKind::Adam, 1e-4, 0.5, 0.9, 1e-8}, {p});
        p.mutable_grad()[0] = 1.0;
        opt.step();
        CHECK(p[0] == doctest::Approx(-1e-4 / (1.0 + 1e-8)).epsilon(1e-12));
        CHECK(opt.steps() == 1);
    }
    SUBCASE("sgd on theta^2/2") {
        Tensor p = Tensor::scalar(1.0, true);
        Optimizer opt({OptimizerKind::Sgd, 0.1}, {p});
        backward(scale(square(p), 0.5));
        opt.step();
        CHECK(p[0] == doctest::Approx(0.9).epsilon(1e-15));
    }
    SUBCASE("adagrad second step") {
        Tensor p = Tensor::scalar(0.0, true);
        Optimizer opt({OptimizerKind::Adagrad, 0.1}, {p});
        p.mutable_grad()[0] = 1.0;
        opt.step();
        const double after_first = p[0];
        opt.step();
        CHECK(std::abs((after_first - p[0]) - 0.1 / std::sqrt(2.0)) <= 1e-9);
    }
    SUBCASE("nan gradient aborts the step") {
        Tensor p = Tensor::from({2}, {1.0, 2.0}, true);
        Optimizer opt({OptimizerKind::Adam, 0.1}, {p});
        p.mutable_grad()[0] = 0.5;
        p.mutable_grad()[1] = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(opt.step(), NumericError);
        CHECK(p[0] == 1.0);
        CHECK(p[1] == 2.0);
        CHECK(opt.steps() == 0);
    }
    CHECK(parse_optimizer_kind("adagrad") == OptimizerKind::Adagrad);
    CHECK_THROWS_AS(parse_optimizer_kind("rmsprop"), DomainError);
}

TEST_CASE("checkpoint round-trips bit-identically") {
    std::mt19937_64 rng(9);
    Conv1d conv(2, 3, 3, 1, 1, rng);
    BatchNorm1d bn(3);
    bn.running_mean.mutable_values()[0] = 1.0 / 3.0;
    ParameterList params;
    conv.collect("conv", params);
    bn.collect("bn", params);

    const auto loaded = parse_parameters(serialize_parameters(params));
    REQUIRE(loaded.size() == params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        CHECK(loaded[i].name == params[i].name);
        CHECK(loaded[i].trainable == params[i].trainable);
        CHECK(loaded[i].tensor.shape() == params[i].tensor.shape());
        for (std::size_t j = 0; j < params[i].tensor.numel(); ++j)
            CHECK(loaded[i].tensor[j] == params[i].tensor[j]);
    }

    Conv1d other(2, 3, 3, 1, 1, rng);
    ParameterList other_params;
    other.collect("conv", other_params);
    assign_parameters(other_params, loaded);
    for (std::size_t j = 0; j < conv.weight.numel(); ++j) CHECK(other.weight[j] == conv.weight[j]);

    CHECK_THROWS_AS(parse_parameters("garbage\n"), ParseError);
    CHECK_THROWS_AS(parse_parameters("jamdet-checkpoint 1\nw 1 1 3\n1 2\n"), ParseError);
}

TEST_CASE("deterministic given seed") {
    auto run = [] {
        std::mt19937_64 rng(11);
        Conv1d conv(1, 2, 3, 1, 1, rng);
        Optimizer opt({OptimizerKind::Adam, 1e-2, 0.5, 0.9}, {conv.weight, conv.bias});
        const Tensor x = random_tensor({4, 1, 6}, rng, -1, 1, false);
        for (int i = 0; i < 5; ++i) {
            opt.zero_grad();
            backward(mean(square(dropout(conv.forward(x), 0.3, i, true))));
            opt.step();
        }
        return std::vector<double>(conv.weight.values().begin(), conv.weight.values().end());
    };
    CHECK(run() == run());
}
