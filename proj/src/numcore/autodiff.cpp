#include "hnmvts/autodiff.hpp"

#include "hnmvts/error.hpp"
#include "hnmvts/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <fmt/format.h>

namespace hnmvts {

const Tensor& Var::value() const {
    if (tape_ == nullptr) throw ContractError("use of an unbound Var");
    return tape_->value(id_);
}

bool Var::requires_grad() const { return tape_ != nullptr && tape_->requires_grad(id_); }

Var Tape::constant(Tensor value) {
    nodes_.push_back(Node{std::move(value), {}, false, {}, {}});
    return Var(this, nodes_.size() - 1);
}

Var Tape::variable(Tensor value) {
    nodes_.push_back(Node{std::move(value), {}, true, {}, {}});
    return Var(this, nodes_.size() - 1);
}

Var Tape::borrow(const Tensor& value, bool requires_grad) {
    nodes_.push_back(Node{{}, {}, requires_grad, {}, {}, &value});
    return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::span<const Var> inputs, BackwardFn backward) {
    Node node;
    node.value = std::move(value);
    node.inputs.reserve(inputs.size());
    for (const auto& in : inputs) {
        if (in.tape() != this) throw ContractError("op mixes Vars from different tapes");
        node.inputs.push_back(in.id());
        node.requires_grad = node.requires_grad || nodes_[in.id()].requires_grad;
    }
    if (node.requires_grad) node.backward = std::move(backward);
    nodes_.push_back(std::move(node));
    return Var(this, nodes_.size() - 1);
}

void Tape::backward(const Var& loss) {
    if (loss.tape() != this) throw ContractError("backward: loss belongs to another tape");
    if (loss.value().size() != 1) {
        throw ContractError(fmt::format("backward needs a scalar loss, got shape {}", shape_str(loss.shape())));
    }
    for (auto& node : nodes_) node.grad = Tensor();
    nodes_[loss.id()].grad = Tensor(loss.shape(), Real(1));

    std::vector<Tensor*> grad_in;
    for (std::size_t id = loss.id() + 1; id-- > 0;) {
        Node& node = nodes_[id];
        if (node.grad.empty() || !node.backward) continue;
        grad_in.assign(node.inputs.size(), nullptr);
        for (std::size_t i = 0; i < node.inputs.size(); ++i) {
            Node& in = nodes_[node.inputs[i]];
            if (!in.requires_grad) continue;
            if (in.grad.empty()) in.grad = Tensor(in.data().shape());
            grad_in[i] = &in.grad;
        }
        node.backward(node.grad, grad_in);
    }
}

Tensor Tape::grad(const Var& v) const {
    const Node& node = nodes_.at(v.id());
    if (node.grad.empty()) return Tensor(node.data().shape());
    return node.grad;
}

Tensor Tape::take_grad(const Var& v) {
    Node& node = nodes_.at(v.id());
    if (node.grad.empty()) return Tensor(node.data().shape());
    return std::exchange(node.grad, Tensor());
}

namespace {

void require_same_shape(const char* op, const Var& a, const Var& b) {
    if (a.shape() != b.shape()) {
        throw DimensionError(fmt::format("{}: shape {} vs {}", op, shape_str(a.shape()), shape_str(b.shape())));
    }
}

void require_same_tape(const Var& a, const Var& b) {
    if (a.tape() != b.tape()) throw ContractError("op mixes Vars from different tapes");
}

Shape without_last(const Shape& s) { return Shape(s.begin(), s.end() - 1); }

void require_row_operand(const char* op, const Var& a, const Var& r) {
    if (a.shape().empty() || r.shape() != without_last(a.shape())) {
        throw DimensionError(fmt::format("{}: row operand {} does not match {}", op, shape_str(r.shape()),
                                         shape_str(a.shape())));
    }
}

template <typename F>
Tensor map(const Tensor& a, F f) {
    Tensor out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
    return out;
}

} // namespace

Var matmul(const Var& a, const Var& b) {
    require_same_tape(a, b);
    if (a.shape().size() != 2 || b.shape().size() != 2 || a.shape()[1] != b.shape()[0]) {
        throw DimensionError(fmt::format("matmul: cannot multiply {} by {}", shape_str(a.shape()), shape_str(b.shape())));
    }
    const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
    Tensor out({m, n});
    kernels::gemm_nn(m, k, n, a.value().ptr(), b.value().ptr(), out.ptr());
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    const Var in[] = {a, b};
    return a.tape()->record(std::move(out), in, [&av, &bv, m, k, n](const Tensor& g, std::span<Tensor* const> gi) {
        if (gi[0]) kernels::gemm_nt(m, n, k, g.ptr(), bv.ptr(), gi[0]->ptr());
        if (gi[1]) kernels::gemm_tn(k, m, n, av.ptr(), g.ptr(), gi[1]->ptr());
    });
}

Var add(const Var& a, const Var& b) {
    require_same_tape(a, b);
    require_same_shape("add", a, b);
    Tensor out = a.value();
    const Tensor& bv = b.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
    const Var in[] = {a, b};
    return a.tape()->record(std::move(out), in, [](const Tensor& g, std::span<Tensor* const> gi) {
        for (auto* t : gi)
            if (t)
                for (std::size_t i = 0; i < g.size(); ++i) (*t)[i] += g[i];
    });
}

Var sub(const Var& a, const Var& b) {
    require_same_tape(a, b);
    require_same_shape("sub", a, b);
    Tensor out = a.value();
    const Tensor& bv = b.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
    const Var in[] = {a, b};
    return a.tape()->record(std::move(out), in, [](const Tensor& g, std::span<Tensor* const> gi) {
        if (gi[0])
            for (std::size_t i = 0; i < g.size(); ++i) (*gi[0])[i] += g[i];
        if (gi[1])
            for (std::size_t i = 0; i < g.size(); ++i) (*gi[1])[i] -= g[i];
    });
}

Var mul(const Var& a, const Var& b) {
    require_same_tape(a, b);
    require_same_shape("mul", a, b);
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    Tensor out(av.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
    const Var in[] = {a, b};
    return a.tape()->record(std::move(out), in, [&av, &bv](const Tensor& g, std::span<Tensor* const> gi) {
        if (gi[0])
            for (std::size_t i = 0; i < g.size(); ++i) (*gi[0])[i] += g[i] * bv[i];
        if (gi[1])
            for (std::size_t i = 0; i < g.size(); ++i) (*gi[1])[i] += g[i] * av[i];
    });
}

Var scale(const Var& a, Real s) {
    const Var in[] = {a};
    return a.tape()->record(map(a.value(), [s](Real v) { return v * s; }), in,
                            [s](const Tensor& g, std::span<Tensor* const> gi) {
                                for (std::size_t i = 0; i < g.size(); ++i) (*gi[0])[i] += g[i] * s;
                            });
}

Var add_scalar(const Var& a, Real s) {
    const Var in[] = {a};
    return a.tape()->record(map(a.value(), [s](Real v) { return v + s; }), in,
                            [](const Tensor& g, std::span<Tensor* const> gi) {
                                for (std::size_t i = 0; i < g.size(); ++i) (*gi[0])[i] += g[i];
                            });
}

Var square(const Var& a) {
    const Tensor& av = a.value();
    const Var in[] = {a};
    return a.tape()->record(map(av, [](Real v) { return v * v; }), in,
                            [&av](const Tensor& g, std::span<Tensor* const> gi) {
                                for (std::size_t i = 0; i < g.size(); ++i) (*gi[0])[i] += 2 * av[i] * g[i];
                            });
}

Var sqrt(const Var& a) {
    Tensor root = map(a.value(), [](Real v) { return std::sqrt(v); });
    const Var in[] = {a};
    return a.tape()->record(root, in, [root](const Tensor& g, std::span<Tensor* const> gi) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            // Unbounded derivative at 0: zero-variance rows contribute no gradient.
            if (root[i] > 0) (*gi[0])[i] += g[i] / (2 * root[i]);
        }
    });
}

Var relu(const Var& a) {
    const Tensor& av = a.value();
    const Var in[] = {a};
    return a.tape()->record(map(av, [](Real v) { return v > 0 ? v : Real(0); }), in,
                            [&av](const Tensor& g, std::span<Tensor* const> gi) {
                                for (std::size_t i = 0; i < g.size(); ++i)
                                    if (av[i] > 0) (*gi[0])[i] += g[i];
                            });
}

Var sum(const Var& a) {
    Real s = 0;
    for (Real v : a.value().data()) s += v;
    const Var in[] = {a};
    return a.tape()->record(Tensor::scalar(s), in, [](const Tensor& g, std::span<Tensor* const> gi) {
        for (auto& v : gi[0]->data()) v += g[0];
    });
}

Var mean(const Var& a) {
    const auto count = static_cast<Real>(a.value().size());
    Real s = 0;
    for (Real v : a.value().data()) s += v;
    const Var in[] = {a};
    return a.tape()->record(Tensor::scalar(s / count), in, [count](const Tensor& g, std::span<Tensor* const> gi) {
        const Real share = g[0] / count;
        for (auto& v : gi[0]->data()) v += share;
    });
}

Var row_mean(const Var& a) {
    if (a.shape().empty()) throw DimensionError("row_mean of a scalar");
    const Tensor& av = a.value();
    const std::size_t len = av.shape().back();
    const std::size_t rows = av.size() / len;
    Tensor out(without_last(av.shape()));
    for (std::size_t r = 0; r < rows; ++r) {
        Real s = 0;
        for (std::size_t j = 0; j < len; ++j) s += av[r * len + j];
        out[r] = s / static_cast<Real>(len);
    }
    const Var in[] = {a};
    return a.tape()->record(std::move(out), in, [rows, len](const Tensor& g, std::span<Tensor* const> gi) {
        for (std::size_t r = 0; r < rows; ++r) {
            const Real share = g[r] / static_cast<Real>(len);
            for (std::size_t j = 0; j < len; ++j) (*gi[0])[r * len + j] += share;
        }
    });
}

Var row_add(const Var& a, const Var& r) {
    require_same_tape(a, r);
    require_row_operand("row_add", a, r);
    const std::size_t len = a.shape().back();
    Tensor out = a.value();
    const Tensor& rv = r.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += rv[i / len];
    const Var in[] = {a, r};
    return a.tape()->record(std::move(out), in, [len](const Tensor& g, std::span<Tensor* const> gi) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (gi[0]) (*gi[0])[i] += g[i];
            if (gi[1]) (*gi[1])[i / len] += g[i];
        }
    });
}

Var row_sub(const Var& a, const Var& r) {
    require_same_tape(a, r);
    require_row_operand("row_sub", a, r);
    const std::size_t len = a.shape().back();
    Tensor out = a.value();
    const Tensor& rv = r.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= rv[i / len];
    const Var in[] = {a, r};
    return a.tape()->record(std::move(out), in, [len](const Tensor& g, std::span<Tensor* const> gi) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (gi[0]) (*gi[0])[i] += g[i];
            if (gi[1]) (*gi[1])[i / len] -= g[i];
        }
    });
}

Var row_mul(const Var& a, const Var& r) {
    require_same_tape(a, r);
    require_row_operand("row_mul", a, r);
    const std::size_t len = a.shape().back();
    const Tensor& av = a.value();
    const Tensor& rv = r.value();
    Tensor out(av.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * rv[i / len];
    const Var in[] = {a, r};
    return a.tape()->record(std::move(out), in, [&av, &rv, len](const Tensor& g, std::span<Tensor* const> gi) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (gi[0]) (*gi[0])[i] += g[i] * rv[i / len];
            if (gi[1]) (*gi[1])[i / len] += g[i] * av[i];
        }
    });
}

Var row_div(const Var& a, const Var& r) {
    require_same_tape(a, r);
    require_row_operand("row_div", a, r);
    const std::size_t len = a.shape().back();
    const Tensor& av = a.value();
    const Tensor& rv = r.value();
    Tensor out(av.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] / rv[i / len];
    const Var in[] = {a, r};
    return a.tape()->record(std::move(out), in, [&av, &rv, len](const Tensor& g, std::span<Tensor* const> gi) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            const Real d = rv[i / len];
            if (gi[0]) (*gi[0])[i] += g[i] / d;
            if (gi[1]) (*gi[1])[i / len] -= g[i] * av[i] / (d * d);
        }
    });
}

Var moving_average(const Var& a, std::size_t kernel) {
    if (a.shape().empty()) throw DimensionError("moving_average of a scalar");
    const std::size_t len = a.shape().back();
    if (kernel % 2 == 0) throw ContractError(fmt::format("moving_average: kernel {} must be odd", kernel));
    if (kernel < 1 || kernel > len) {
        throw ContractError(fmt::format("moving_average: kernel {} outside [1, {}]", kernel, len));
    }
    const std::size_t rows = a.value().size() / len;
    Tensor out(a.shape());
    kernels::moving_average(rows, len, kernel, a.value().ptr(), out.ptr());
    const Var in[] = {a};
    return a.tape()->record(std::move(out), in, [rows, len, kernel](const Tensor& g, std::span<Tensor* const> gi) {
        kernels::moving_average_grad(rows, len, kernel, g.ptr(), gi[0]->ptr());
    });
}

Var reshape(const Var& a, Shape shape) {
    Tensor out = a.value().reshaped(std::move(shape));
    const Var in[] = {a};
    return a.tape()->record(std::move(out), in, [](const Tensor& g, std::span<Tensor* const> gi) {
        for (std::size_t i = 0; i < g.size(); ++i) (*gi[0])[i] += g[i];
    });
}

Var transpose(const Var& a) {
    if (a.shape().size() != 2) throw DimensionError(fmt::format("transpose needs rank 2, got {}", shape_str(a.shape())));
    const std::size_t m = a.shape()[0], n = a.shape()[1];
    const Tensor& av = a.value();
    Tensor out({n, m});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out[j * m + i] = av[i * n + j];
    const Var in[] = {a};
    return a.tape()->record(std::move(out), in, [m, n](const Tensor& g, std::span<Tensor* const> gi) {
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) (*gi[0])[i * n + j] += g[j * m + i];
    });
}

Var slice(const Var& a, std::size_t begin, std::size_t end) {
    if (a.shape().empty() || begin >= end || end > a.shape()[0]) {
        throw DimensionError(fmt::format("slice [{}, {}) out of range for {}", begin, end, shape_str(a.shape())));
    }
    Shape shape = a.shape();
    const std::size_t stride = a.value().size() / shape[0];
    shape[0] = end - begin;
    const Tensor& av = a.value();
    std::vector<Real> values(av.data().begin() + static_cast<std::ptrdiff_t>(begin * stride),
                             av.data().begin() + static_cast<std::ptrdiff_t>(end * stride));
    const Var in[] = {a};
    return a.tape()->record(Tensor(std::move(shape), std::move(values)), in,
                            [offset = begin * stride](const Tensor& g, std::span<Tensor* const> gi) {
                                for (std::size_t i = 0; i < g.size(); ++i) (*gi[0])[offset + i] += g[i];
                            });
}

Var concat(std::span<const Var> parts) {
    if (parts.empty()) throw ContractError("concat of zero tensors");
    Shape shape = parts[0].shape();
    if (shape.empty()) throw DimensionError("concat of scalars");
    std::size_t rows = 0;
    std::vector<Real> values;
    for (const auto& p : parts) {
        require_same_tape(parts[0], p);
        if (p.shape().size() != shape.size() || !std::equal(shape.begin() + 1, shape.end(), p.shape().begin() + 1)) {
            throw DimensionError(fmt::format("concat: {} vs {}", shape_str(shape), shape_str(p.shape())));
        }
        rows += p.shape()[0];
        values.insert(values.end(), p.value().data().begin(), p.value().data().end());
    }
    shape[0] = rows;
    std::vector<std::size_t> sizes;
    for (const auto& p : parts) sizes.push_back(p.value().size());
    return parts[0].tape()->record(Tensor(std::move(shape), std::move(values)), parts,
                                   [sizes](const Tensor& g, std::span<Tensor* const> gi) {
                                       std::size_t offset = 0;
                                       for (std::size_t k = 0; k < sizes.size(); ++k) {
                                           if (gi[k])
                                               for (std::size_t i = 0; i < sizes[k]; ++i) (*gi[k])[i] += g[offset + i];
                                           offset += sizes[k];
                                       }
                                   });
}

Var linear(const Var& x, const Var& w, const std::optional<Var>& bias) {
    require_same_tape(x, w);
    if (x.shape().size() != 2 || w.shape().size() != 2 || x.shape()[1] != w.shape()[1]) {
        throw DimensionError(fmt::format("linear: input {} vs weight {}", shape_str(x.shape()), shape_str(w.shape())));
    }
    const std::size_t rows = x.shape()[0], in_dim = x.shape()[1], out_dim = w.shape()[0];
    if (bias && bias->shape() != Shape{out_dim}) {
        throw DimensionError(fmt::format("linear: bias {} vs weight {}", shape_str(bias->shape()), shape_str(w.shape())));
    }
    Tensor out({rows, out_dim});
    if (bias) {
        const Tensor& bv = bias->value();
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t o = 0; o < out_dim; ++o) out[r * out_dim + o] = bv[o];
    }
    kernels::gemm_nt(rows, in_dim, out_dim, x.value().ptr(), w.value().ptr(), out.ptr());
    const Tensor& xv = x.value();
    const Tensor& wv = w.value();
    std::vector<Var> in{x, w};
    if (bias) in.push_back(*bias);
    return x.tape()->record(std::move(out), in,
                            [&xv, &wv, rows, in_dim, out_dim](const Tensor& g, std::span<Tensor* const> gi) {
                                if (gi[0]) kernels::gemm_nn(rows, out_dim, in_dim, g.ptr(), wv.ptr(), gi[0]->ptr());
                                if (gi[1]) kernels::gemm_tn(out_dim, rows, in_dim, g.ptr(), xv.ptr(), gi[1]->ptr());
                                if (gi.size() > 2 && gi[2])
                                    for (std::size_t r = 0; r < rows; ++r)
                                        for (std::size_t o = 0; o < out_dim; ++o) (*gi[2])[o] += g[r * out_dim + o];
                            });
}

Var channel_linear(const Var& h, const Var& w) {
    require_same_tape(h, w);
    const Shape& hs = h.shape();
    const Shape& ws = w.shape();
    if (hs.size() != 3 || ws.size() != 3 || hs[2] != ws[2] || (ws[0] != hs[1] && ws[0] != 1)) {
        throw DimensionError(fmt::format("channel_linear: hidden {} vs weights {}", shape_str(hs), shape_str(ws)));
    }
    const kernels::ChannelLinearDims dims{hs[0], hs[1], ws[1], hs[2], ws[0]};
    Tensor out({dims.batch, dims.channels, dims.out});
    kernels::channel_linear(dims, h.value().ptr(), w.value().ptr(), out.ptr());
    const Tensor& hv = h.value();
    const Tensor& wv = w.value();
    const Var in[] = {h, w};
    return h.tape()->record(std::move(out), in, [&hv, &wv, dims](const Tensor& g, std::span<Tensor* const> gi) {
        if (gi[0]) kernels::channel_linear_grad_input(dims, g.ptr(), wv.ptr(), gi[0]->ptr());
        if (gi[1]) kernels::channel_linear_grad_weight(dims, g.ptr(), hv.ptr(), gi[1]->ptr());
    });
}

} // namespace hnmvts
