// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

namespace erddci {

/// Per-timestep signal retention {alpha_t} and its cumulative product.
///
/// Training timesteps run 1..T. Index 0 is the clean-data boundary with
/// alpha_bar(0) = 1, so the final inference step lands on the clean latent.
class NoiseSchedule {
public:
    /// `alphas[i]` is alpha at timestep i+1; each value must lie in (0, 1].
    explicit NoiseSchedule(std::vector<double> alphas);

    int train_steps() const noexcept { return static_cast<int>(alpha_.size()) - 1; }

    double alpha(int t) const;
    double alpha_bar(int t) const;

    const std::vector<double>& alphas() const noexcept { return alpha_; }
    const std::vector<double>& alpha_bars() const noexcept { return alpha_bar_; }

private:
    std::vector<double> alpha_;      // [0] = 1
    std::vector<double> alpha_bar_;  // [0] = 1
};

/// beta linearly interpolated from beta_start to beta_end inclusive over T
/// steps; alpha = 1 - beta.
NoiseSchedule make_linear_schedule(int train_steps, double beta_start, double beta_end);

/// The default 1000-step schedule with beta from 1e-4 to 0.02.
NoiseSchedule make_default_schedule();

/// Strictly increasing subsequence of training timesteps used by the
/// samplers. Consecutive entries (k-1, k) form one sampler step; entry 0 is
/// the implicit clean boundary, timestep 0.
class TimestepPlan {
public:
    explicit TimestepPlan(std::vector<int> steps);

    /// Number of sampler steps.
    int size() const noexcept { return static_cast<int>(steps_.size()); }

    /// Training timestep of plan index k in [0, size()]; index 0 maps to 0.
    int timestep(int k) const;

    /// Training timestep at the noisy end of the plan.
    int last() const { return timestep(size()); }

    const std::vector<int>& steps() const noexcept { return steps_; }

private:
    std::vector<int> steps_;
};

/// Evenly strided plan ending at T: stride = floor(T / n) and entry i
/// (1-based) is T - (n - i) * stride. For T = 10, n = 3 this gives {4, 7, 10}.
TimestepPlan make_plan(int train_steps, int n_steps);

}  // namespace erddci
