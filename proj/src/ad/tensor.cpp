#include "jamdet/ad/tensor.hpp"

#include "jamdet/ad/ops.hpp"
#include "jamdet/error.hpp"

#include <optional>
#include <unordered_map>
#include <unordered_set>

namespace jamdet::ad {

namespace {

thread_local bool t_grad_enabled = true;

const Node& checked(const std::shared_ptr<Node>& n) {
    if (!n) throw StateError("use of undefined tensor");
    return *n;
}

}  // namespace

std::size_t numel(const Shape& shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

std::string to_string(const Shape& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

bool grad_enabled() { return t_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(t_grad_enabled) { t_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { t_grad_enabled = previous_; }
EnableGradGuard::EnableGradGuard() : previous_(t_grad_enabled) { t_grad_enabled = true; }
EnableGradGuard::~EnableGradGuard() { t_grad_enabled = previous_; }

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
    if (ad::numel(shape) != values.size())
        throw ShapeError("shape " + ad::to_string(shape) + " does not match " + std::to_string(values.size()) +
                         " values");
    for (auto d : shape)
        if (d == 0) throw ShapeError("zero-sized dimension in shape " + ad::to_string(shape));
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->value = std::move(values);
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    const auto n = ad::numel(shape);
    return from(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from({1}, {value}, requires_grad); }

Tensor Tensor::make_result(Shape shape, std::vector<double> values, const char* op, std::vector<Tensor> inputs,
                           BackwardFn backward) {
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->value = std::move(values);
    n->op = op;
    bool needs = false;
    if (t_grad_enabled)
        for (const auto& in : inputs) needs = needs || in.requires_grad();
    if (needs) {
        n->requires_grad = true;
        n->inputs = std::move(inputs);
        n->backward = std::move(backward);
    }
    return Tensor(std::move(n));
}

const Shape& Tensor::shape() const { return checked(node_).shape; }

std::size_t Tensor::size(std::size_t axis) const {
    const auto& s = shape();
    if (axis >= s.size()) throw ShapeError("axis " + std::to_string(axis) + " out of range for " + ad::to_string(s));
    return s[axis];
}

std::span<const double> Tensor::values() const { return checked(node_).value; }

std::span<double> Tensor::mutable_values() {
    checked(node_);
    if (node_->backward) throw StateError("mutable_values() on a non-leaf tensor");
    return node_->value;
}

double Tensor::item() const {
    const auto v = values();
    if (v.size() != 1) throw ShapeError("item() on tensor of shape " + ad::to_string(shape()));
    return v[0];
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

bool Tensor::is_leaf() const { return !checked(node_).backward; }

void Tensor::set_requires_grad(bool on) {
    checked(node_);
    if (node_->backward) throw StateError("set_requires_grad() on a non-leaf tensor");
    node_->requires_grad = on;
}

bool Tensor::has_grad() const { return !checked(node_).grad.empty(); }

std::span<const double> Tensor::grad() const { return checked(node_).grad; }

std::span<double> Tensor::mutable_grad() {
    checked(node_);
    if (node_->grad.empty()) node_->grad.assign(node_->value.size(), 0.0);
    return node_->grad;
}

void Tensor::zero_grad() {
    checked(node_);
    node_->grad.assign(node_->value.size(), 0.0);
}

Tensor Tensor::detach() const { return from(shape(), std::vector<double>(values().begin(), values().end()), false); }

Tensor Tensor::clone() const {
    return from(shape(), std::vector<double>(values().begin(), values().end()), requires_grad());
}

namespace {

// Reverse topological order (output first) over nodes that require grad.
std::vector<Node*> reverse_topo(Node* root) {
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack{{root, 0}};
    seen.insert(root);
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->inputs.size()) {
            Node* child = node->inputs[next++].node().get();
            if (child->requires_grad && seen.insert(child).second) stack.emplace_back(child, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    return {order.rbegin(), order.rend()};
}

// Returns accumulated gradients for every leaf reached plus any interior node
// listed in `keep`.
std::unordered_map<Node*, Tensor> propagate(const Tensor& output, bool create_graph,
                                            const std::unordered_set<Node*>& keep) {
    if (output.numel() != 1)
        throw DomainError("gradient of non-scalar output of shape " + to_string(output.shape()));
    std::unordered_map<Node*, Tensor> grads;
    if (!output.requires_grad()) return grads;

    std::optional<NoGradGuard> no_grad;
    std::optional<EnableGradGuard> with_grad;
    if (create_graph)
        with_grad.emplace();
    else
        no_grad.emplace();

    Node* root = output.node().get();
    grads.emplace(root, Tensor::full(output.shape(), 1.0));
    for (Node* node : reverse_topo(root)) {
        if (!node->backward) continue;
        const auto it = grads.find(node);
        if (it == grads.end()) continue;
        const Tensor g = it->second;
        const auto in_grads = node->backward(node->inputs, g);
        for (std::size_t i = 0; i < node->inputs.size(); ++i) {
            const Tensor& in = node->inputs[i];
            if (!in.requires_grad() || i >= in_grads.size() || !in_grads[i].defined()) continue;
            auto [slot, inserted] = grads.try_emplace(in.node().get(), in_grads[i]);
            if (!inserted) slot->second = add(slot->second, in_grads[i]);
        }
        if (!keep.count(node)) grads.erase(node);
    }
    return grads;
}

}  // namespace

std::vector<Tensor> gradients(const Tensor& output, const std::vector<Tensor>& inputs, bool create_graph) {
    std::unordered_set<Node*> keep;
    for (const auto& in : inputs) keep.insert(in.node().get());
    const auto grads = propagate(output, create_graph, keep);

    std::vector<Tensor> out;
    out.reserve(inputs.size());
    for (const auto& in : inputs) {
        const auto it = grads.find(in.node().get());
        out.push_back(it != grads.end() ? it->second : Tensor::zeros(in.shape()));
    }
    return out;
}

void backward(const Tensor& loss) {
    const auto grads = propagate(loss, false, {});
    for (const auto& [node, g] : grads) {
        if (node->backward) continue;
        if (node->grad.empty()) node->grad.assign(node->value.size(), 0.0);
        const auto gv = g.values();
        for (std::size_t i = 0; i < gv.size(); ++i) node->grad[i] += gv[i];
    }
}

}  // namespace jamdet::ad
