#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace jamdet::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

class Tensor;

// Given the recorded inputs of a node and the gradient flowing into its
// output, returns one gradient per input (undefined Tensor for inputs that do
// not need one). Backward functions are written in terms of differentiable
// ops, so running them with recording enabled yields a graph that can itself
// be differentiated.
using BackwardFn = std::function<std::vector<Tensor>(const std::vector<Tensor>& inputs, const Tensor& grad_out)>;

struct Node {
    Shape shape;
    std::vector<double> value;
    bool requires_grad = false;
    const char* op = "leaf";
    std::vector<Tensor> inputs;
    BackwardFn backward;
    std::vector<double> grad;  // accumulated by backward() on leaves; empty until then
};

// Shared handle to a node of the computation graph. Copies alias the same
// storage; use clone() or detach() for independent values.
class Tensor {
public:
    Tensor() = default;

    static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return static_cast<bool>(node_); }
    const Shape& shape() const;
    std::size_t dim() const { return shape().size(); }
    std::size_t size(std::size_t axis) const;
    std::size_t numel() const { return values().size(); }

    std::span<const double> values() const;
    // Writable view for in-place parameter updates. Only valid on leaves.
    std::span<double> mutable_values();
    double item() const;
    double operator[](std::size_t i) const { return values()[i]; }

    bool requires_grad() const;
    bool is_leaf() const;
    void set_requires_grad(bool on);

    bool has_grad() const;
    std::span<const double> grad() const;
    std::span<double> mutable_grad();
    void zero_grad();

    // Same values, no history.
    Tensor detach() const;
    // Independent leaf copy keeping requires_grad.
    Tensor clone() const;

    const std::shared_ptr<Node>& node() const { return node_; }

    // Used by op implementations.
    static Tensor make_result(Shape shape, std::vector<double> values, const char* op, std::vector<Tensor> inputs,
                              BackwardFn backward);

private:
    explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
    std::shared_ptr<Node> node_;
};

// Recording is on by default. While a NoGradGuard is alive on a thread, ops
// produce constant tensors.
bool grad_enabled();

class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

class EnableGradGuard {
public:
    EnableGradGuard();
    ~EnableGradGuard();
    EnableGradGuard(const EnableGradGuard&) = delete;
    EnableGradGuard& operator=(const EnableGradGuard&) = delete;

private:
    bool previous_;
};

// d(output)/d(inputs) for a scalar output. With create_graph the returned
// gradients are recorded and can be differentiated again. Inputs that the
// output does not depend on get zero gradients.
std::vector<Tensor> gradients(const Tensor& output, const std::vector<Tensor>& inputs, bool create_graph = false);

// Accumulates d(loss)/d(leaf) into every reachable leaf with requires_grad.
// Repeated calls add up until zero_grad().
void backward(const Tensor& loss);

}  // namespace jamdet::ad
