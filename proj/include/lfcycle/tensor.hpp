#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lfcycle::ad {

inline int64_t numel_of(const std::vector<int>& shape) {
    int64_t n = 1;
    for (int e : shape) n *= e;
    return n;
}

inline std::string shape_str(const std::vector<int>& shape) {
    if (shape.empty()) return "scalar";
    std::ostringstream os;
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    return os.str();
}

/// Thread-local switch disabling graph recording (inference paths).
bool grad_enabled();

struct NoGradGuard {
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;
};

namespace detail {

template <typename T>
struct Node {
    std::vector<int> shape;
    std::vector<T> value;
    std::vector<T> grad; // allocated on demand, same length as value
    bool requires_grad = false;
    bool was_op = false;   // created by an operation (has/had a backward fn)
    bool consumed = false; // backward already ran through this node
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;

    void ensure_grad() {
        if (grad.size() != value.size()) grad.assign(value.size(), T(0));
    }
};

} // namespace detail

/// Dense n-d array participating in a define-by-run graph. Cheap to copy
/// (shared handle). Gradients accumulate additively on requires_grad leaves
/// until zero_grad().
template <typename T>
class Tensor {
public:
    using NodeT = detail::Node<T>;

    Tensor() = default;
    explicit Tensor(std::shared_ptr<NodeT> n) : node_(std::move(n)) {}

    static Tensor zeros(std::vector<int> shape) {
        return full(std::move(shape), T(0));
    }

    static Tensor full(std::vector<int> shape, T v) {
        auto n = std::make_shared<NodeT>();
        n->value.assign(static_cast<size_t>(numel_of(shape)), v);
        n->shape = std::move(shape);
        return Tensor(std::move(n));
    }

    static Tensor from_data(std::vector<int> shape, std::vector<T> data) {
        if (static_cast<int64_t>(data.size()) != numel_of(shape))
            throw std::invalid_argument("Tensor: data length " + std::to_string(data.size()) +
                                        " does not match shape " + shape_str(shape));
        auto n = std::make_shared<NodeT>();
        n->shape = std::move(shape);
        n->value = std::move(data);
        return Tensor(std::move(n));
    }

    static Tensor scalar(T v) { return full({1}, v); }

    bool defined() const { return node_ != nullptr; }
    const std::vector<int>& shape() const { return node_->shape; }
    int64_t numel() const { return static_cast<int64_t>(node_->value.size()); }

    std::vector<T>& values() { return node_->value; }
    const std::vector<T>& values() const { return node_->value; }

    T item() const {
        if (numel() != 1)
            throw std::runtime_error("Tensor::item: tensor has shape " + shape_str(shape()));
        return node_->value[0];
    }

    bool requires_grad() const { return node_->requires_grad; }

    Tensor& set_requires_grad(bool v) {
        if (node_->was_op)
            throw std::runtime_error("set_requires_grad: only leaf tensors may be toggled");
        node_->requires_grad = v;
        return *this;
    }

    bool has_grad() const { return !node_->grad.empty(); }

    /// Gradient buffer; zeros if backward has not touched this leaf yet.
    const std::vector<T>& grad() const {
        node_->ensure_grad();
        return node_->grad;
    }

    void zero_grad() {
        node_->grad.assign(node_->value.size(), T(0));
    }

    std::shared_ptr<NodeT>& node() { return node_; }
    const std::shared_ptr<NodeT>& node() const { return node_; }

private:
    std::shared_ptr<NodeT> node_;
};

/// Reverse-mode sweep from a scalar loss. Visits each recorded node exactly
/// once and releases the graph afterwards; a second call on the same graph
/// throws.
template <typename T>
void backward(const Tensor<T>& loss);

} // namespace lfcycle::ad
