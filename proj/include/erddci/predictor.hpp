// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "erddci/tensor.hpp"

namespace erddci {

/// Conditioning embedding. The null (unconditional) condition is the
/// all-zero vector of the predictor's condition dimension.
class Condition {
public:
    Condition() = default;
    explicit Condition(std::vector<double> values);

    static Condition null(std::size_t dim) { return Condition(std::vector<double>(dim, 0.0)); }
    static Condition one_hot(std::size_t dim, std::size_t index);

    std::size_t dim() const noexcept { return values_.size(); }
    const std::vector<double>& values() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    friend bool operator==(const Condition&, const Condition&) = default;

private:
    std::vector<double> values_;
};

/// Noise-prediction function eps(z, c, t) with call accounting.
///
/// `predict` is the only public entry point: it checks the condition
/// dimension, forwards to `evaluate`, checks that the result has z's shape,
/// and bumps the call counter. Implementations must be pure, i.e. repeated
/// evaluation on identical inputs returns bit-identical tensors, and safe to
/// call concurrently.
class Predictor {
public:
    Predictor() = default;
    Predictor(const Predictor&) = delete;
    Predictor& operator=(const Predictor&) = delete;
    virtual ~Predictor() = default;

    /// `t` is a training timestep in [1, T].
    Tensor predict(const Tensor& z, const Condition& c, int t) const;

    std::uint64_t call_count() const noexcept { return calls_.load(std::memory_order_relaxed); }
    void reset_call_count() noexcept { calls_.store(0, std::memory_order_relaxed); }

    virtual std::size_t condition_dim() const noexcept = 0;

protected:
    virtual Tensor evaluate(const Tensor& z, const Condition& c, int t) const = 0;

private:
    mutable std::atomic<std::uint64_t> calls_{0};
};

/// Forwards to another predictor while keeping a private call counter, so
/// concurrent pipelines sharing one model can each account for their calls.
class CountingPredictor final : public Predictor {
public:
    explicit CountingPredictor(const Predictor& inner) : inner_(inner) {}
    std::size_t condition_dim() const noexcept override { return inner_.condition_dim(); }

protected:
    Tensor evaluate(const Tensor& z, const Condition& c, int t) const override {
        return inner_.predict(z, c, t);
    }

private:
    const Predictor& inner_;
};

/// Returns the same tensor for every query. The value is broadcast when it
/// has a single element, otherwise it must match the query's element count.
class ConstantPredictor final : public Predictor {
public:
    ConstantPredictor(Tensor value, std::size_t condition_dim);
    std::size_t condition_dim() const noexcept override { return condition_dim_; }

protected:
    Tensor evaluate(const Tensor& z, const Condition& c, int t) const override;

private:
    Tensor value_;
    std::size_t condition_dim_;
};

/// Classifier-free guidance: eps_null + omega * (eps_cond - eps_null).
///
/// At omega == 1 the unconditional branch has weight zero and is skipped, so
/// the call costs one evaluation instead of two.
Tensor cfg_combine(const Predictor& pred, const Tensor& z, const Condition& c, int t, double omega);

}  // namespace erddci
