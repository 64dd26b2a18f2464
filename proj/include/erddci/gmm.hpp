// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "erddci/predictor.hpp"
#include "erddci/rng.hpp"
#include "erddci/schedule.hpp"

namespace erddci {

/// Isotropic Gaussian mixture over clean latents:
///   z0 ~ sum_k w_k N(mean_k, variance * I).
///
/// Conditions have one entry per component and act on the mixture weights:
/// the effective log-weight of component k is log w_k + condition_gain * c_k.
/// The null condition therefore recovers the prior and a one-hot condition
/// boosts a single component.
struct GmmDataModel {
    std::vector<double> weights;
    std::vector<Tensor> means;
    double variance = 0.0;
    double condition_gain = 4.0;

    std::size_t components() const noexcept { return weights.size(); }
    const Shape& latent_shape() const { return means.at(0).shape(); }

    /// Throws ParameterError unless weights are positive and sum to 1 within
    /// 1e-12, means share a shape, and variance >= 0.
    void validate() const;

    /// Normalized component probabilities under condition c.
    std::vector<double> conditioned_weights(const Condition& c) const;

    /// Draws z0 from the component picked with the conditioned weights.
    Tensor sample(Rng& rng, const Condition& c) const;

    /// Draws a component index from the prior weights, then z0 from it.
    Tensor sample_component(Rng& rng, std::size_t component) const;
};

/// Closed-form minimum-MSE noise predictor for a GmmDataModel.
///
/// With v = alpha_bar * s^2 + 1 - alpha_bar, each component contributes
/// z_t ~ N(sqrt(alpha_bar) mean_k, v I). The predictor forms responsibilities
/// under that marginal, the posterior mean m of z0, and returns
///   eps*(z, t) = (z - sqrt(alpha_bar) m) / sqrt(1 - alpha_bar).
class GmmPredictor final : public Predictor {
public:
    GmmPredictor(GmmDataModel model, NoiseSchedule schedule);

    std::size_t condition_dim() const noexcept override { return model_.components(); }
    const GmmDataModel& model() const noexcept { return model_; }

    /// Posterior mean E[z0 | z_t = z] under condition c.
    Tensor posterior_mean(const Tensor& z, const Condition& c, int t) const;

protected:
    Tensor evaluate(const Tensor& z, const Condition& c, int t) const override;

private:
    GmmDataModel model_;
    NoiseSchedule schedule_;
};

}  // namespace erddci
