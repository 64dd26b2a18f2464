// SPDX-License-Identifier: Apache-2.0
#include "erddci/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "erddci/errors.hpp"

namespace erddci {

void GmmDataModel::validate() const {
    if (weights.empty() || weights.size() != means.size()) {
        throw ParameterError("mixture needs one mean per weight and at least one component");
    }
    double total = 0.0;
    for (double w : weights) {
        if (!(w > 0.0)) throw ParameterError("mixture weights must be positive");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ParameterError("mixture weights must sum to 1");
    for (const auto& m : means) {
        if (m.empty() || m.shape() != means.front().shape()) {
            throw ShapeError("mixture means must share one shape");
        }
    }
    if (!(variance >= 0.0) || !std::isfinite(variance)) throw ParameterError("variance must be >= 0");
    if (!std::isfinite(condition_gain)) throw ParameterError("condition gain must be finite");
}

std::vector<double> GmmDataModel::conditioned_weights(const Condition& c) const {
    if (c.dim() != components()) throw ShapeError("condition dimension must equal component count");
    std::vector<double> logw(components());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < components(); ++k) {
        logw[k] = std::log(weights[k]) + condition_gain * c[k];
        top = std::max(top, logw[k]);
    }
    double total = 0.0;
    for (double& l : logw) {
        l = std::exp(l - top);
        total += l;
    }
    for (double& l : logw) l /= total;
    return logw;
}

Tensor GmmDataModel::sample_component(Rng& rng, std::size_t component) const {
    const Tensor& mean = means.at(component);
    const double sd = std::sqrt(variance);
    std::vector<double> out(mean.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = mean[i] + sd * rng.normal();
    return Tensor(mean.shape(), std::move(out));
}

Tensor GmmDataModel::sample(Rng& rng, const Condition& c) const {
    const auto w = conditioned_weights(c);
    double u = 1.0 - rng.uniform();  // [0, 1)
    std::size_t k = 0;
    for (; k + 1 < w.size(); ++k) {
        if (u < w[k]) break;
        u -= w[k];
    }
    return sample_component(rng, k);
}

GmmPredictor::GmmPredictor(GmmDataModel model, NoiseSchedule schedule)
    : model_(std::move(model)), schedule_(std::move(schedule)) {
    model_.validate();
}

Tensor GmmPredictor::posterior_mean(const Tensor& z, const Condition& c, int t) const {
    if (z.size() != model_.means.front().size()) {
        throw ShapeError("query has " + std::to_string(z.size()) + " elements, mixture means have " +
                         std::to_string(model_.means.front().size()));
    }
    const double ab = schedule_.alpha_bar(t);
    const double sab = std::sqrt(ab);
    const double s2 = model_.variance;
    const double v = ab * s2 + (1.0 - ab);
    if (!(v > 0.0)) throw SingularityError("mixture marginal has zero variance at timestep " + std::to_string(t));

    const std::size_t K = model_.components();
    const auto prior = model_.conditioned_weights(c);
    std::vector<double> logr(K);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < K; ++k) {
        const Tensor& mu = model_.means[k];
        double sq = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double d = z[i] - sab * mu[i];
            sq += d * d;
        }
        logr[k] = std::log(prior[k]) - sq / (2.0 * v);
        top = std::max(top, logr[k]);
    }
    double total = 0.0;
    for (double& l : logr) {
        l = std::exp(l - top);
        total += l;
    }

    // Per component: E[z0 | z, k] = mu_k + (sab s^2 / v)(z - sab mu_k)
    //                             = shrink * z + keep * mu_k.
    const double shrink = sab * s2 / v;
    const double keep = (1.0 - ab) / v;
    std::vector<double> m(z.size(), 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        const double r = logr[k] / total;
        if (r == 0.0) continue;
        const Tensor& mu = model_.means[k];
        for (std::size_t i = 0; i < m.size(); ++i) m[i] += r * mu[i];
    }
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = shrink * z[i] + keep * m[i];
    return Tensor(z.shape(), std::move(m));
}

Tensor GmmPredictor::evaluate(const Tensor& z, const Condition& c, int t) const {
    const double ab = schedule_.alpha_bar(t);
    if (!(1.0 - ab > 0.0)) {
        throw SingularityError("noise level is zero at timestep " + std::to_string(t));
    }
    const Tensor m = posterior_mean(z, c, t);
    const double sab = std::sqrt(ab);
    const double inv = 1.0 / std::sqrt(1.0 - ab);
    std::vector<double> eps(z.size());
    for (std::size_t i = 0; i < eps.size(); ++i) eps[i] = (z[i] - sab * m[i]) * inv;
    return Tensor(z.shape(), std::move(eps));
}

}  // namespace erddci
