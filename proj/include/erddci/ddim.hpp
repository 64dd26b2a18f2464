// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <vector>

#include "erddci/predictor.hpp"
#include "erddci/rng.hpp"
#include "erddci/schedule.hpp"
#include "erddci/tensor.hpp"

namespace erddci {

enum class Direction { inversion, inference };

const char* to_string(Direction d) noexcept;

struct TrajectoryPoint {
    int timestep = 0;
    Tensor latent;
};

/// Ordered (timestep, latent) pairs. Inversion trajectories have strictly
/// increasing timesteps, inference trajectories strictly decreasing ones,
/// and every latent shares the first latent's shape.
class Trajectory {
public:
    explicit Trajectory(Direction direction) : direction_(direction) {}

    void push(int timestep, Tensor latent);

    Direction direction() const noexcept { return direction_; }
    std::size_t size() const noexcept { return points_.size(); }
    bool empty() const noexcept { return points_.empty(); }
    const TrajectoryPoint& operator[](std::size_t i) const { return points_.at(i); }
    const TrajectoryPoint& front() const { return points_.at(0); }
    const TrajectoryPoint& back() const { return points_.at(points_.size() - 1); }
    const std::vector<TrajectoryPoint>& points() const noexcept { return points_; }

private:
    Direction direction_;
    std::vector<TrajectoryPoint> points_;
};

/// Writes index.csv (step,timestep,file), manifest.txt, and one tensor file
/// per point into `dir`.
void save_trajectory(const std::filesystem::path& dir, const Trajectory& trajectory);
Trajectory load_trajectory(const std::filesystem::path& dir);

/// z_t = sqrt(alpha_t) z_prev + sqrt(1 - alpha_t) eps with fresh eps.
Tensor forward_step(const Tensor& z_prev, int t, const NoiseSchedule& schedule, Rng& rng);

/// z_t = sqrt(alpha_bar_t) z0 + sqrt(1 - alpha_bar_t) eps with fresh eps.
Tensor forward_jump(const Tensor& z0, int t, const NoiseSchedule& schedule, Rng& rng);

/// Same as above with a caller-supplied eps.
Tensor forward_jump(const Tensor& z0, int t, const NoiseSchedule& schedule, const Tensor& eps);

/// Clean-latent estimate (z - sqrt(1 - alpha_bar_t) eps) / sqrt(alpha_bar_t).
Tensor predict_x0(const Tensor& z, const Tensor& eps, int t, const NoiseSchedule& schedule);

/// Noise injection from t_prev up to t (t_prev < t, both training timesteps,
/// t_prev may be the clean boundary 0):
///   sqrt(ab_t) (z_prev - sqrt(1 - ab_prev) eps) / sqrt(ab_prev) + sqrt(1 - ab_t) eps.
Tensor ddim_invert_step(const Tensor& z_prev, int t_prev, int t, const Tensor& eps, const NoiseSchedule& schedule);

/// Noise removal from t down to t_prev, the algebraic inverse of
/// ddim_invert_step for the same eps.
Tensor ddim_infer_step(const Tensor& z, int t, int t_prev, const Tensor& eps, const NoiseSchedule& schedule);

/// Deterministic DDIM inversion over the plan. Each step's guided noise is
/// evaluated at the latent it starts from; one guided evaluation per step.
Trajectory ddim_invert(const Tensor& z0, const Predictor& pred, const Condition& c, double omega,
                       const TimestepPlan& plan, const NoiseSchedule& schedule);

/// Deterministic DDIM sampling from the last plan timestep down to 0, with
/// the guided noise evaluated at the current latent.
Trajectory ddim_infer(const Tensor& z_last, const Predictor& pred, const Condition& c, double omega,
                      const TimestepPlan& plan, const NoiseSchedule& schedule);

}  // namespace erddci
