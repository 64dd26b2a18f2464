// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace erddci {

using Shape = std::vector<std::size_t>;

/// Number of elements described by `shape`. Throws ShapeError on empty
/// shapes, zero extents, or overflow.
std::size_t checked_element_count(const Shape& shape);

std::string shape_to_string(const Shape& shape);

/// Dense row-major tensor of 64-bit floats.
///
/// A Tensor always holds finite values and a shape whose extent product
/// equals the element count; every constructor and arithmetic helper
/// enforces that. Treat it as an immutable value once built: the mutable
/// accessors exist for construction code (datasets, samplers, tests).
class Tensor {
public:
    Tensor() = default;

    /// Zero-filled tensor.
    explicit Tensor(Shape shape);
    Tensor(Shape shape, std::vector<double> data);

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
    static Tensor full(Shape shape, double value);
    static Tensor vector(std::initializer_list<double> values);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t size() const noexcept { return data_.size(); }
    std::size_t ndim() const noexcept { return shape_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<const double> values() const noexcept { return data_; }
    std::span<double> mutable_values() noexcept { return data_; }
    const std::vector<double>& data() const noexcept { return data_; }

    double operator[](std::size_t i) const { return data_[i]; }
    double& operator[](std::size_t i) { return data_[i]; }

    /// Row-major element access for 2-D tensors.
    double at(std::size_t row, std::size_t col) const;

    /// Same data, different shape with the same element count.
    Tensor reshaped(Shape shape) const;

    bool same_shape(const Tensor& other) const noexcept { return shape_ == other.shape_; }

    /// Bitwise equality of shape and data.
    friend bool operator==(const Tensor& a, const Tensor& b) = default;

private:
    Shape shape_;
    std::vector<double> data_;
};

/// a*x + b*y, elementwise. Shapes must match.
Tensor lincomb(double a, const Tensor& x, double b, const Tensor& y);

Tensor operator+(const Tensor& x, const Tensor& y);
Tensor operator-(const Tensor& x, const Tensor& y);
Tensor operator*(double s, const Tensor& x);

double max_abs_diff(const Tensor& a, const Tensor& b);
double l2_norm(const Tensor& a);
double l2_distance(const Tensor& a, const Tensor& b);

/// Throws ShapeError unless a and b have identical shapes.
void require_same_shape(const Tensor& a, const Tensor& b, const char* context);

/// Throws ParameterError if any value is NaN or infinite.
void require_finite(std::span<const double> values, const char* context);

}  // namespace erddci
