#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "dragan/errors.hpp"

namespace dragan::nn {

using Shape = std::vector<std::size_t>;

inline std::size_t numel_of(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_string(const Shape& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

namespace detail {

struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    // Reads this node's grad and accumulates into the parents' grads.
    std::function<void(Node&)> backward_fn;

    std::vector<double>& ensure_grad() {
        if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
        return grad;
    }
};

}  // namespace detail

/// Dense row-major array of doubles that can take part in a reverse-mode
/// differentiation graph.
///
/// Copies share storage (handle semantics, like a parameter reference);
/// use `clone()` for a deep, untracked copy. An op output records a graph
/// edge only when one of its inputs requires a gradient.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(Shape shape, bool requires_grad = false) : node_(std::make_shared<detail::Node>()) {
        node_->value.assign(numel_of(shape), 0.0);
        node_->shape = std::move(shape);
        node_->requires_grad = requires_grad;
    }

    Tensor(Shape shape, std::vector<double> values, bool requires_grad = false)
        : node_(std::make_shared<detail::Node>()) {
        if (values.size() != numel_of(shape))
            throw DimensionError("tensor: " + std::to_string(values.size()) + " values for shape " +
                                 shape_string(shape));
        node_->shape = std::move(shape);
        node_->value = std::move(values);
        node_->requires_grad = requires_grad;
    }

    Tensor(Shape shape, std::initializer_list<double> values, bool requires_grad = false)
        : Tensor(std::move(shape), std::vector<double>(values), requires_grad) {}

    static Tensor scalar(double v, bool requires_grad = false) { return Tensor({1}, {v}, requires_grad); }

    bool defined() const { return static_cast<bool>(node_); }

    const Shape& shape() const { return node_->shape; }
    std::size_t rank() const { return node_->shape.size(); }
    std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
    std::size_t numel() const { return node_->value.size(); }

    std::span<double> values() { return node_->value; }
    std::span<const double> values() const { return node_->value; }
    double& operator[](std::size_t i) { return node_->value[i]; }
    double operator[](std::size_t i) const { return node_->value[i]; }

    double item() const {
        if (numel() != 1) throw ContractError("item() on tensor of shape " + shape_string(shape()));
        return node_->value[0];
    }

    bool requires_grad() const { return node_->requires_grad; }
    void set_requires_grad(bool on) { node_->requires_grad = on; }

    bool has_grad() const { return node_->grad.size() == node_->value.size(); }
    std::span<double> grad() { return node_->ensure_grad(); }
    std::span<const double> grad() const { return node_->ensure_grad(); }
    void zero_grad() {
        if (has_grad()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
    }

    /// True when the tensor was produced by a tracked op.
    bool has_graph_edge() const { return static_cast<bool>(node_->backward_fn); }

    Tensor clone() const {
        return Tensor(node_->shape, node_->value, false);
    }

    Tensor reshaped(Shape shape) const;

    detail::Node& node() const { return *node_; }
    const std::shared_ptr<detail::Node>& node_ptr() const { return node_; }

    /// Builds an op output. When any input requires a gradient the output is
    /// linked to its inputs and `backward_fn` is installed.
    static Tensor make_result(Shape shape, std::vector<double> values, std::initializer_list<Tensor> inputs,
                              std::function<void(detail::Node&)> backward_fn) {
        Tensor out(std::move(shape), std::move(values));
        bool track = std::any_of(inputs.begin(), inputs.end(),
                                 [](const Tensor& t) { return t.defined() && t.requires_grad(); });
        if (track) {
            auto& n = out.node();
            n.requires_grad = true;
            for (const auto& t : inputs)
                if (t.defined()) n.parents.push_back(t.node_ptr());
            n.backward_fn = std::move(backward_fn);
        }
        return out;
    }

private:
    std::shared_ptr<detail::Node> node_;
};

/// Populates the gradient of every reachable tensor that requires one with
/// d(loss)/d(tensor). Gradients accumulate; call zero_grad between steps.
inline void backward(const Tensor& loss) {
    if (loss.numel() != 1)
        throw ContractError("backward() needs a scalar loss, got shape " + shape_string(loss.shape()));
    if (!loss.requires_grad()) return;

    // Iterative post-order DFS gives a topological order with each node once.
    std::vector<detail::Node*> order;
    std::unordered_set<detail::Node*> seen;
    std::vector<std::pair<detail::Node*, std::size_t>> stack;
    stack.emplace_back(&loss.node(), 0);
    seen.insert(&loss.node());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            detail::Node* p = node->parents[next++].get();
            if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    loss.node().ensure_grad()[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        detail::Node& n = **it;
        if (n.backward_fn) {
            n.ensure_grad();
            n.backward_fn(n);
        }
    }
}

namespace detail {

inline bool wants_grad(const std::shared_ptr<Node>& p) { return p && p->requires_grad; }

}  // namespace detail

inline Tensor Tensor::reshaped(Shape shape) const {
    if (numel_of(shape) != numel())
        throw DimensionError("reshape " + shape_string(this->shape()) + " -> " + shape_string(shape));
    return make_result(std::move(shape), node_->value, {*this}, [](detail::Node& self) {
        auto& p = *self.parents[0];
        auto& g = p.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    });
}

}  // namespace dragan::nn
