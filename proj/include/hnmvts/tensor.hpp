#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace hnmvts {

#ifdef HNMVTS_FLOAT32
using Real = float;
#else
using Real = double;
#endif

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Dense row-major array. Every numeric quantity in the library is one of these.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, Real fill = Real(0));
    Tensor(Shape shape, std::vector<Real> values);

    static Tensor scalar(Real v);
    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
    static Tensor ones(Shape shape) { return Tensor(std::move(shape), Real(1)); }
    static Tensor identity(std::size_t n);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t axis) const;
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<Real> data() noexcept { return data_; }
    std::span<const Real> data() const noexcept { return data_; }
    Real* ptr() noexcept { return data_.data(); }
    const Real* ptr() const noexcept { return data_.data(); }

    Real& operator[](std::size_t i) noexcept { return data_[i]; }
    Real operator[](std::size_t i) const noexcept { return data_[i]; }

    /// Multi-index access with bounds checks.
    Real& at(std::initializer_list<std::size_t> index);
    Real at(std::initializer_list<std::size_t> index) const;

    /// Same data under a new shape of equal size.
    Tensor reshaped(Shape shape) const&;
    Tensor reshaped(Shape shape) &&;

    void fill(Real v);
    bool all_finite() const noexcept;

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    std::size_t flat_index(std::initializer_list<std::size_t> index) const;

    Shape shape_;
    std::vector<Real> data_;
};

/// Largest absolute elementwise difference; shapes must match.
Real max_abs_diff(const Tensor& a, const Tensor& b);

} // namespace hnmvts
