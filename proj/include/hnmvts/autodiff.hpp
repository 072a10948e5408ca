#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hnmvts/tensor.hpp"

namespace hnmvts {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
public:
    Var() = default;

    const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }
    bool requires_grad() const;
    std::size_t id() const noexcept { return id_; }
    Tape* tape() const noexcept { return tape_; }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

/// Reverse-mode record. Nodes are appended in evaluation order, so replaying them
/// backwards visits every consumer before its producers.
class Tape {
public:
    /// Receives the gradient of the node's output and one accumulator per input
    /// (nullptr for inputs that do not require a gradient).
    using BackwardFn = std::function<void(const Tensor& grad_out, std::span<Tensor* const> grad_in)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Tensor value);
    Var variable(Tensor value);

    /// Records `value` without copying it; the tensor must outlive the tape and stay unchanged while it is in use.
    Var borrow(const Tensor& value, bool requires_grad);

    /// Appends an op result. The backward closure is kept only when some input needs a gradient.
    Var record(Tensor value, std::span<const Var> inputs, BackwardFn backward);

    /// Populates gradients of the scalar `loss` for every node on its path.
    void backward(const Var& loss);

    /// Gradient from the last backward(); zeros for nodes the loss does not depend on.
    Tensor grad(const Var& v) const;

    /// Moves the gradient of `v` out of the tape; a later grad(v) reads zeros.
    Tensor take_grad(const Var& v);

    const Tensor& value(std::size_t id) const {
        const Node& n = nodes_[id];
        return n.borrowed ? *n.borrowed : n.value;
    }
    bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
    std::size_t size() const noexcept { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        bool requires_grad = false;
        std::vector<std::size_t> inputs;
        BackwardFn backward;
        const Tensor* borrowed = nullptr;
        const Tensor& data() const { return borrowed ? *borrowed : value; }
    };

    // deque keeps node addresses stable while the tape grows; closures hold references.
    std::deque<Node> nodes_;
};

/// A named trainable (or frozen) tensor owned by a model.
struct Parameter {
    std::string name;
    Tensor value;
    bool trainable = true;
};

// Differentiable primitives. Shapes are checked; mismatches throw DimensionError.

Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, Real s);
Var add_scalar(const Var& a, Real s);
Var square(const Var& a);
Var sqrt(const Var& a);
Var relu(const Var& a);
Var sum(const Var& a);
Var mean(const Var& a);

/// Reductions and broadcasts over the last axis. `r` has the shape of `a` without its last axis.
Var row_mean(const Var& a);
Var row_add(const Var& a, const Var& r);
Var row_sub(const Var& a, const Var& r);
Var row_mul(const Var& a, const Var& r);
Var row_div(const Var& a, const Var& r);

/// Centered moving average along the last axis with replicate padding.
Var moving_average(const Var& a, std::size_t kernel);

Var reshape(const Var& a, Shape shape);
Var transpose(const Var& a);
/// Rows [begin, end) along axis 0.
Var slice(const Var& a, std::size_t begin, std::size_t end);
Var concat(std::span<const Var> parts);

/// Dense layer: x [rows, in] * w[out, in]^T (+ bias[out]).
Var linear(const Var& x, const Var& w, const std::optional<Var>& bias = std::nullopt);

/// y[b,n,:] = W[n] h[b,n,:]; h [B,N,D], w [N,H,D] or [1,H,D] (shared) -> [B,N,H].
Var channel_linear(const Var& h, const Var& w);

} // namespace hnmvts
