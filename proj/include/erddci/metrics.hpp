// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "erddci/ddim.hpp"
#include "erddci/tensor.hpp"

namespace erddci {

/// PSNR reported for identical inputs.
inline constexpr double kPsnrCapDb = 99.0;

double mse(const Tensor& a, const Tensor& b);

/// 10 log10(peak^2 / mse), or kPsnrCapDb when mse == 0.
double psnr(const Tensor& a, const Tensor& b, double peak);

/// Mean SSIM over all 8x8 windows (stride 1, uniform weights, population
/// statistics) with C1 = (0.01 peak)^2 and C2 = (0.03 peak)^2.
/// Accepts [H, W] or [1, H, W] tensors with H, W >= 8.
double ssim(const Tensor& a, const Tensor& b, double peak);

/// True if `t` is a single-channel image SSIM can score.
bool is_ssim_image(const Tensor& t);

/// Quality of one reconstruction method against the input latent.
struct MethodScores {
    double mse = 0.0;
    double psnr = 0.0;
    std::optional<double> ssim;  ///< absent for non-image latents
    double max_abs = 0.0;
    std::uint64_t inversion_calls = 0;
    std::uint64_t inference_calls = 0;
    double wall_ms = 0.0;
};

MethodScores score(const Tensor& reference, const Tensor& result, double peak);

/// Side-by-side report for one input: exact dual-chain round trip, plain
/// DDIM round trip, and (when the harness runs it) guided reconstruction.
struct ReconReport {
    MethodScores erddci;
    MethodScores ddim;
    std::optional<MethodScores> guided;
};

struct NamedTrajectory {
    std::string name;
    Trajectory trajectory;
};

/// 2-D (or k-D) coordinates of every trajectory point in a shared PCA basis.
struct TrajectoryProjection {
    std::vector<std::string> names;
    /// coords[trajectory][point][component]
    std::vector<std::vector<std::vector<double>>> coords;
    /// Variance captured by each component, non-increasing.
    std::vector<double> explained_variance;
    /// All input points coincide; every coordinate is zero.
    bool degenerate = false;
};

/// Projects every latent of every trajectory onto the top-k principal
/// components of the pooled, centered point set. Components come from the
/// eigen-decomposition of the points' Gram matrix; each component's sign is
/// chosen so that its largest-magnitude coordinate is positive.
TrajectoryProjection pca_project(std::span<const NamedTrajectory> trajectories, std::size_t k = 2);

/// Pointwise full-dimensional distance ||a_i - b_i||_2. Lengths must match.
std::vector<double> distance_series(const Trajectory& a, const Trajectory& b);

/// Spearman rank correlation (average ranks for ties).
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace erddci
