// SPDX-License-Identifier: Apache-2.0
#include "erddci/harness/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "erddci/errors.hpp"
#include "erddci/rng.hpp"

namespace erddci::harness {
namespace {

// Separate streams so that evaluation items never coincide with fit samples.
constexpr std::uint64_t kFitStream = 0x9e3779b97f4a7c15ull;
constexpr std::uint64_t kStyleStream = 0xc2b2ae3d27d4eb4full;

double soft_edge(double signed_distance) {
    // 1 inside, 0 outside, a one-pixel ramp across the boundary
    return std::clamp(0.5 - signed_distance, 0.0, 1.0);
}

}  // namespace

Tensor render_shape(ShapeKind kind, double cx, double cy, double size, double intensity, std::size_t side) {
    if (side < 8) throw ParameterError("shapes need a side of at least 8");
    Tensor img = Tensor::full({side, side}, -1.0);
    auto px = img.mutable_values();
    for (std::size_t y = 0; y < side; ++y) {
        for (std::size_t x = 0; x < side; ++x) {
            const double dx = static_cast<double>(x) + 0.5 - cx;
            const double dy = static_cast<double>(y) + 0.5 - cy;
            double d = 0.0;
            switch (kind) {
                case ShapeKind::disk: d = std::hypot(dx, dy) - size; break;
                case ShapeKind::square: d = std::max(std::abs(dx), std::abs(dy)) - size; break;
                case ShapeKind::bar: d = std::max(std::abs(dx) - size, std::abs(dy) - size / 3.0); break;
            }
            const double cover = soft_edge(d);
            px[y * side + x] = -1.0 + cover * (intensity + 1.0);
        }
    }
    return img;
}

namespace {

Item draw_shape(Rng& rng, std::size_t kind, std::size_t side) {
    const double scale = static_cast<double>(side) / 32.0;
    const double cx = rng.uniform(8.0, 24.0) * scale;
    const double cy = rng.uniform(8.0, 24.0) * scale;
    const double size = rng.uniform(4.0, 9.0) * scale;
    const double intensity = rng.uniform(0.2, 1.0);
    return Item{render_shape(static_cast<ShapeKind>(kind), cx, cy, size, intensity, side),
                Condition::one_hot(kShapeKinds, kind), kind};
}

}  // namespace

std::vector<Item> make_shapes(std::uint64_t seed, int count, std::size_t side) {
    Rng rng(seed);
    std::vector<Item> items;
    items.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) items.push_back(draw_shape(rng, static_cast<std::size_t>(i) % kShapeKinds, side));
    return items;
}

GmmDataModel fit_shapes_model(std::uint64_t seed, int samples, std::size_t side, double condition_gain) {
    if (samples < static_cast<int>(kShapeKinds)) throw ParameterError("fit needs at least one sample per kind");
    Rng rng(seed ^ kFitStream);
    const std::size_t D = side * side;
    std::vector<std::vector<double>> sums(kShapeKinds, std::vector<double>(D, 0.0));
    std::vector<std::size_t> counts(kShapeKinds, 0);
    std::vector<Item> drawn;
    drawn.reserve(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i) {
        Item it = draw_shape(rng, static_cast<std::size_t>(i) % kShapeKinds, side);
        for (std::size_t j = 0; j < D; ++j) sums[it.label][j] += it.latent[j];
        ++counts[it.label];
        drawn.push_back(std::move(it));
    }
    // Each component sits on its class medoid: the fit sample nearest the
    // class mean. The mean itself is a blurred average of many shapes.
    std::vector<std::size_t> medoid(kShapeKinds, 0);
    std::vector<double> best(kShapeKinds, std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < kShapeKinds; ++k) {
        for (auto& v : sums[k]) v /= static_cast<double>(counts[k]);
    }
    for (std::size_t i = 0; i < drawn.size(); ++i) {
        const std::size_t k = drawn[i].label;
        double d = 0.0;
        for (std::size_t j = 0; j < D; ++j) d += (drawn[i].latent[j] - sums[k][j]) * (drawn[i].latent[j] - sums[k][j]);
        if (d < best[k]) best[k] = d, medoid[k] = i;
    }
    GmmDataModel model;
    model.condition_gain = condition_gain;
    for (std::size_t k = 0; k < kShapeKinds; ++k) {
        model.means.push_back(drawn[medoid[k]].latent);
        model.weights.push_back(1.0 / static_cast<double>(kShapeKinds));
    }
    double sq = 0.0;
    for (const auto& it : drawn) {
        const auto& mu = model.means[it.label];
        for (std::size_t j = 0; j < D; ++j) {
            const double d = it.latent[j] - mu[j];
            sq += d * d;
        }
    }
    model.variance = sq / static_cast<double>(drawn.size() * D);
    model.validate();
    return model;
}

GmmDataModel make_gmm_model(std::uint64_t seed, std::size_t components, std::size_t dim, double spread,
                            double variance, double condition_gain) {
    if (components == 0 || dim == 0) throw ParameterError("mixture needs components and a dimension");
    Rng rng(seed ^ kFitStream);
    GmmDataModel model;
    model.condition_gain = condition_gain;
    model.variance = variance;
    for (std::size_t k = 0; k < components; ++k) {
        model.means.push_back(spread * sample_standard_normal(rng, {dim}));
        model.weights.push_back(1.0 / static_cast<double>(components));
    }
    model.validate();
    return model;
}

std::vector<Item> sample_items(const GmmDataModel& model, std::uint64_t seed, int count) {
    Rng rng(seed);
    std::vector<Item> items;
    const std::size_t K = model.components();
    for (int i = 0; i < count; ++i) {
        const std::size_t k = static_cast<std::size_t>(i) % K;
        items.push_back(Item{model.sample_component(rng, k), Condition::one_hot(K, k), k});
    }
    return items;
}

GmmDataModel make_reference_model(const ExperimentConfig& cfg) {
    const auto& d = cfg.data;
    if (d.kind == DataKind::shapes32) {
        return fit_shapes_model(d.seed, cfg.predictor.fit_samples, d.side, cfg.predictor.condition_gain);
    }
    return make_gmm_model(d.seed, d.components, d.dim, d.spread, d.variance, cfg.predictor.condition_gain);
}

std::vector<Item> make_items(const ExperimentConfig& cfg) {
    const auto& d = cfg.data;
    if (d.kind == DataKind::shapes32) return make_shapes(d.seed, d.count, d.side);
    return sample_items(make_reference_model(cfg), d.seed, d.count);
}

double peak_value(const ExperimentConfig& cfg, const std::vector<Item>& items) {
    if (cfg.data.kind == DataKind::shapes32) return 2.0;
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (const auto& it : items) {
        for (double v : it.latent.values()) {
            if (first) lo = hi = v, first = false;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    return hi > lo ? hi - lo : 1.0;
}

Condition edit_condition(EditType type, const Condition& source, std::size_t target, double mix,
                         double style_scale, std::uint64_t seed) {
    const std::size_t K = source.dim();
    if (target >= K) throw ConfigError("edit target index outside the condition");
    std::vector<double> v(source.values().begin(), source.values().end());
    switch (type) {
        case EditType::t1:
            std::fill(v.begin(), v.end(), 0.0);
            v[target] = 1.0;
            break;
        case EditType::t2:
            for (std::size_t k = 0; k < K; ++k) v[k] = (1.0 - mix) * v[k] + mix * (k == target ? 1.0 : 0.0);
            break;
        case EditType::t3: {
            Rng rng(seed ^ kStyleStream);
            std::vector<double> u(K);
            double norm = 0.0;
            for (auto& x : u) {
                x = rng.normal();
                norm += x * x;
            }
            norm = std::sqrt(norm);
            for (std::size_t k = 0; k < K; ++k) v[k] += style_scale * u[k] / norm;
            break;
        }
    }
    return Condition(std::move(v));
}

}  // namespace erddci::harness
