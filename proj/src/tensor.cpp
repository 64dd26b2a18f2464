// SPDX-License-Identifier: Apache-2.0
#include "erddci/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "erddci/errors.hpp"

namespace erddci {

std::size_t checked_element_count(const Shape& shape) {
    if (shape.empty()) {
        throw ShapeError("tensor shape must have at least one extent");
    }
    std::size_t count = 1;
    for (std::size_t extent : shape) {
        if (extent == 0) {
            throw ShapeError("zero extent in shape " + shape_to_string(shape));
        }
        if (count > std::numeric_limits<std::size_t>::max() / extent) {
            throw ShapeError("shape " + shape_to_string(shape) + " overflows");
        }
        count *= extent;
    }
    return count;
}

std::string shape_to_string(const Shape& shape) {
    std::string out = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i != 0) out += ", ";
        out += std::to_string(shape[i]);
    }
    return out + "]";
}

void require_finite(std::span<const double> values, const char* context) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw ParameterError(std::string(context) + ": non-finite value");
        }
    }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* context) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(context) + ": shape mismatch " + shape_to_string(a.shape()) +
                         " vs " + shape_to_string(b.shape()));
    }
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
    data_.assign(checked_element_count(shape_), 0.0);
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (checked_element_count(shape_) != data_.size()) {
        throw ShapeError("shape " + shape_to_string(shape_) + " does not match " +
                         std::to_string(data_.size()) + " values");
    }
    require_finite(data_, "Tensor");
}

Tensor Tensor::full(Shape shape, double value) {
    Tensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), value);
    require_finite(t.data_, "Tensor::full");
    return t;
}

Tensor Tensor::vector(std::initializer_list<double> values) {
    return Tensor({values.size()}, std::vector<double>(values));
}

double Tensor::at(std::size_t row, std::size_t col) const {
    if (shape_.size() != 2 || row >= shape_[0] || col >= shape_[1]) {
        throw ShapeError("Tensor::at out of range for shape " + shape_to_string(shape_));
    }
    return data_[row * shape_[1] + col];
}

Tensor Tensor::reshaped(Shape shape) const {
    if (checked_element_count(shape) != data_.size()) {
        throw ShapeError("cannot reshape " + shape_to_string(shape_) + " to " + shape_to_string(shape));
    }
    Tensor out;
    out.shape_ = std::move(shape);
    out.data_ = data_;
    return out;
}

Tensor lincomb(double a, const Tensor& x, double b, const Tensor& y) {
    require_same_shape(x, y, "lincomb");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = a * x[i] + b * y[i];
    }
    return Tensor(x.shape(), std::move(out));
}

Tensor operator+(const Tensor& x, const Tensor& y) { return lincomb(1.0, x, 1.0, y); }
Tensor operator-(const Tensor& x, const Tensor& y) { return lincomb(1.0, x, -1.0, y); }

Tensor operator*(double s, const Tensor& x) {
    std::vector<double> out(x.data());
    for (double& v : out) v *= s;
    return Tensor(x.shape(), std::move(out));
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

double l2_norm(const Tensor& a) {
    double s = 0.0;
    for (double v : a.values()) s += v * v;
    return std::sqrt(s);
}

double l2_distance(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "l2_distance");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace erddci
