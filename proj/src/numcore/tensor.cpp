#include "hnmvts/tensor.hpp"

#include "hnmvts/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace hnmvts {

std::size_t shape_size(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_str(const Shape& shape) {
    return fmt::format("[{}]", fmt::join(shape, "x"));
}

Tensor::Tensor(Shape shape, Real fill)
    : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<Real> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
    if (shape_size(shape_) != data_.size()) {
        throw DimensionError(fmt::format("shape {} needs {} values, got {}", shape_str(shape_),
                                         shape_size(shape_), data_.size()));
    }
}

Tensor Tensor::scalar(Real v) { return Tensor(Shape{}, std::vector<Real>{v}); }

Tensor Tensor::identity(std::size_t n) {
    Tensor t({n, n});
    for (std::size_t i = 0; i < n; ++i) t.data_[i * n + i] = Real(1);
    return t;
}

std::size_t Tensor::dim(std::size_t axis) const {
    if (axis >= shape_.size()) {
        throw DimensionError(fmt::format("axis {} out of range for shape {}", axis, shape_str(shape_)));
    }
    return shape_[axis];
}

std::size_t Tensor::flat_index(std::initializer_list<std::size_t> index) const {
    if (index.size() != shape_.size()) {
        throw DimensionError(fmt::format("index of rank {} into shape {}", index.size(), shape_str(shape_)));
    }
    std::size_t flat = 0;
    std::size_t axis = 0;
    for (auto i : index) {
        if (i >= shape_[axis]) {
            throw DimensionError(fmt::format("index {} out of range on axis {} of shape {}", i, axis,
                                             shape_str(shape_)));
        }
        flat = flat * shape_[axis] + i;
        ++axis;
    }
    return flat;
}

Real& Tensor::at(std::initializer_list<std::size_t> index) { return data_[flat_index(index)]; }
Real Tensor::at(std::initializer_list<std::size_t> index) const { return data_[flat_index(index)]; }

Tensor Tensor::reshaped(Shape shape) const& {
    Tensor copy = *this;
    return std::move(copy).reshaped(std::move(shape));
}

Tensor Tensor::reshaped(Shape shape) && {
    if (shape_size(shape) != data_.size()) {
        throw DimensionError(fmt::format("cannot reshape {} to {}", shape_str(shape_), shape_str(shape)));
    }
    shape_ = std::move(shape);
    return std::move(*this);
}

void Tensor::fill(Real v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](Real v) { return std::isfinite(v); });
}

Real max_abs_diff(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw DimensionError(fmt::format("max_abs_diff: {} vs {}", shape_str(a.shape()), shape_str(b.shape())));
    }
    Real m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace hnmvts
