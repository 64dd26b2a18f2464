// SPDX-License-Identifier: Apache-2.0
#include "erddci/schedule.hpp"

#include <cmath>
#include <string>

#include "erddci/errors.hpp"

namespace erddci {

NoiseSchedule::NoiseSchedule(std::vector<double> alphas) {
    if (alphas.empty()) throw ParameterError("noise schedule needs at least one step");
    alpha_.reserve(alphas.size() + 1);
    alpha_bar_.reserve(alphas.size() + 1);
    alpha_.push_back(1.0);
    alpha_bar_.push_back(1.0);
    for (double a : alphas) {
        if (!(a > 0.0 && a <= 1.0)) {
            throw ParameterError("alpha must lie in (0, 1], got " + std::to_string(a));
        }
        alpha_.push_back(a);
        alpha_bar_.push_back(alpha_bar_.back() * a);
    }
    if (!(alpha_bar_.back() > 0.0)) throw ParameterError("alpha_bar underflows to zero");
}

double NoiseSchedule::alpha(int t) const {
    if (t < 0 || t > train_steps()) throw ParameterError("timestep " + std::to_string(t) + " out of range");
    return alpha_[static_cast<std::size_t>(t)];
}

double NoiseSchedule::alpha_bar(int t) const {
    if (t < 0 || t > train_steps()) throw ParameterError("timestep " + std::to_string(t) + " out of range");
    return alpha_bar_[static_cast<std::size_t>(t)];
}

NoiseSchedule make_linear_schedule(int train_steps, double beta_start, double beta_end) {
    if (train_steps < 1) throw ParameterError("T_train must be at least 1");
    if (!(beta_start >= 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
        throw ParameterError("betas must satisfy 0 <= beta_start <= beta_end < 1");
    }
    std::vector<double> alphas(static_cast<std::size_t>(train_steps));
    for (int i = 0; i < train_steps; ++i) {
        const double frac = train_steps == 1 ? 0.0 : static_cast<double>(i) / (train_steps - 1);
        const double beta = beta_start + (beta_end - beta_start) * frac;
        alphas[static_cast<std::size_t>(i)] = 1.0 - beta;
    }
    return NoiseSchedule(std::move(alphas));
}

NoiseSchedule make_default_schedule() { return make_linear_schedule(1000, 1e-4, 0.02); }

TimestepPlan::TimestepPlan(std::vector<int> steps) : steps_(std::move(steps)) {
    if (steps_.empty()) throw ParameterError("timestep plan is empty");
    int prev = 0;
    for (int s : steps_) {
        if (s <= prev) throw ParameterError("timestep plan must be strictly increasing and positive");
        prev = s;
    }
}

int TimestepPlan::timestep(int k) const {
    if (k < 0 || k > size()) throw ParameterError("plan index " + std::to_string(k) + " out of range");
    return k == 0 ? 0 : steps_[static_cast<std::size_t>(k - 1)];
}

TimestepPlan make_plan(int train_steps, int n_steps) {
    if (n_steps < 1 || n_steps > train_steps) {
        throw ParameterError("n_steps must satisfy 1 <= n_steps <= T_train");
    }
    const int stride = train_steps / n_steps;
    std::vector<int> steps(static_cast<std::size_t>(n_steps));
    for (int i = 1; i <= n_steps; ++i) {
        steps[static_cast<std::size_t>(i - 1)] = train_steps - (n_steps - i) * stride;
    }
    return TimestepPlan(std::move(steps));
}

}  // namespace erddci
