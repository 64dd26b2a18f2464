// SPDX-License-Identifier: Apache-2.0
#include "erddci/predictor.hpp"

#include <cmath>
#include <string>

#include "erddci/errors.hpp"

namespace erddci {

Condition::Condition(std::vector<double> values) : values_(std::move(values)) {
    require_finite(values_, "Condition");
}

Condition Condition::one_hot(std::size_t dim, std::size_t index) {
    if (index >= dim) throw ParameterError("one-hot index out of range");
    std::vector<double> v(dim, 0.0);
    v[index] = 1.0;
    return Condition(std::move(v));
}

Tensor Predictor::predict(const Tensor& z, const Condition& c, int t) const {
    if (c.dim() != condition_dim()) {
        throw ShapeError("condition has dimension " + std::to_string(c.dim()) + ", predictor expects " +
                         std::to_string(condition_dim()));
    }
    Tensor out = evaluate(z, c, t);
    calls_.fetch_add(1, std::memory_order_relaxed);
    require_same_shape(out, z, "predictor output");
    return out;
}

ConstantPredictor::ConstantPredictor(Tensor value, std::size_t condition_dim)
    : value_(std::move(value)), condition_dim_(condition_dim) {
    if (value_.empty()) throw ShapeError("constant predictor needs a value");
}

Tensor ConstantPredictor::evaluate(const Tensor& z, const Condition&, int) const {
    if (value_.size() == 1) return Tensor::full(z.shape(), value_[0]);
    if (value_.size() != z.size()) {
        throw ShapeError("constant predictor value " + shape_to_string(value_.shape()) +
                         " cannot broadcast to " + shape_to_string(z.shape()));
    }
    return value_.reshaped(z.shape());
}

Tensor cfg_combine(const Predictor& pred, const Tensor& z, const Condition& c, int t, double omega) {
    if (!(omega >= 0.0) || !std::isfinite(omega)) {
        throw ParameterError("guidance scale must be finite and non-negative");
    }
    Tensor eps_cond = pred.predict(z, c, t);
    if (omega == 1.0) return eps_cond;
    Tensor eps_null = pred.predict(z, Condition::null(c.dim()), t);
    if (!eps_cond.same_shape(eps_null)) {
        throw IntegrityError("conditional and unconditional predictions differ in shape");
    }
    std::vector<double> out(eps_cond.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = eps_null[i] + omega * (eps_cond[i] - eps_null[i]);
    }
    return Tensor(z.shape(), std::move(out));
}

}  // namespace erddci
