// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "erddci/gmm.hpp"
#include "erddci/harness/config.hpp"
#include "erddci/predictor.hpp"
#include "erddci/tensor.hpp"

namespace erddci::harness {

enum class ShapeKind : std::size_t { disk = 0, square = 1, bar = 2 };
inline constexpr std::size_t kShapeKinds = 3;

struct Item {
    Tensor latent;
    Condition condition;
    std::size_t label = 0;
};

/// One rendered shape: background -1, a soft-edged foreground of the given
/// intensity in [0.2, 1]. Centre coordinates are in pixels.
Tensor render_shape(ShapeKind kind, double cx, double cy, double size, double intensity, std::size_t side);

/// `count` shapes drawn from `seed`, kinds cycling disk, square, bar.
/// Latents have shape [side, side]; conditions are one-hot over kinds.
std::vector<Item> make_shapes(std::uint64_t seed, int count, std::size_t side);

/// Mixture fitted to `samples` shapes drawn from a separate seed stream:
/// one component per kind centred on the class medoid, equal weights, and
/// the per-pixel variance pooled around those centres.
GmmDataModel fit_shapes_model(std::uint64_t seed, int samples, std::size_t side, double condition_gain);

/// Mixture with `components` means drawn i.i.d. N(0, spread^2) in `dim`
/// dimensions, equal weights, the given within-component variance.
GmmDataModel make_gmm_model(std::uint64_t seed, std::size_t components, std::size_t dim, double spread,
                            double variance, double condition_gain);

/// `count` draws from the model, components cycling 0..K-1.
std::vector<Item> sample_items(const GmmDataModel& model, std::uint64_t seed, int count);

/// Items for the configured dataset.
std::vector<Item> make_items(const ExperimentConfig& cfg);

/// Reference mixture for the configured dataset: the generating model for
/// gmm-samples, the fitted model for shapes-32.
GmmDataModel make_reference_model(const ExperimentConfig& cfg);

/// Value range used for PSNR and SSIM: 2 for shapes, otherwise the spread
/// of the items.
double peak_value(const ExperimentConfig& cfg, const std::vector<Item>& items);

/// Target condition for an edit of the given type:
///   T1 replaces the source with one-hot(target),
///   T2 moves `mix` of the way from the source to one-hot(target),
///   T3 adds `style_scale` times a fixed unit offset derived from `seed`.
Condition edit_condition(EditType type, const Condition& source, std::size_t target, double mix,
                         double style_scale, std::uint64_t seed);

}  // namespace erddci::harness
