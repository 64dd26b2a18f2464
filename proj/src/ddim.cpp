// SPDX-License-Identifier: Apache-2.0
#include "erddci/ddim.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "erddci/errors.hpp"
#include "erddci/tensor_file.hpp"

namespace erddci {

const char* to_string(Direction d) noexcept {
    return d == Direction::inversion ? "inversion" : "inference";
}

void Trajectory::push(int timestep, Tensor latent) {
    if (!points_.empty()) {
        const int last = points_.back().timestep;
        const bool ok = direction_ == Direction::inversion ? timestep > last : timestep < last;
        if (!ok) throw ParameterError("trajectory timesteps must be strictly monotone in its direction");
        require_same_shape(latent, points_.front().latent, "Trajectory::push");
    }
    points_.push_back({timestep, std::move(latent)});
}

namespace {

// Moves z from noise level ab_from to ab_to along the eps direction.
Tensor transfer(const Tensor& z, const Tensor& eps, double ab_from, double ab_to) {
    require_same_shape(z, eps, "DDIM step");
    const double x0_scale = std::sqrt(ab_to) / std::sqrt(ab_from);
    const double noise_from = std::sqrt(1.0 - ab_from);
    const double noise_to = std::sqrt(1.0 - ab_to);
    std::vector<double> out(z.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = x0_scale * (z[i] - noise_from * eps[i]) + noise_to * eps[i];
    }
    return Tensor(z.shape(), std::move(out));
}

void check_pair(int t_prev, int t, const NoiseSchedule& schedule) {
    if (t_prev < 0 || t > schedule.train_steps() || t_prev >= t) {
        throw ParameterError("DDIM step needs 0 <= t_prev < t <= T, got t_prev=" + std::to_string(t_prev) +
                             ", t=" + std::to_string(t));
    }
}

}  // namespace

Tensor forward_step(const Tensor& z_prev, int t, const NoiseSchedule& schedule, Rng& rng) {
    if (t < 1) throw ParameterError("forward_step needs t >= 1");
    const double a = schedule.alpha(t);
    const Tensor eps = sample_standard_normal(rng, z_prev.shape());
    return lincomb(std::sqrt(a), z_prev, std::sqrt(1.0 - a), eps);
}

Tensor forward_jump(const Tensor& z0, int t, const NoiseSchedule& schedule, Rng& rng) {
    return forward_jump(z0, t, schedule, sample_standard_normal(rng, z0.shape()));
}

Tensor forward_jump(const Tensor& z0, int t, const NoiseSchedule& schedule, const Tensor& eps) {
    const double ab = schedule.alpha_bar(t);
    return lincomb(std::sqrt(ab), z0, std::sqrt(1.0 - ab), eps);
}

Tensor predict_x0(const Tensor& z, const Tensor& eps, int t, const NoiseSchedule& schedule) {
    const double ab = schedule.alpha_bar(t);
    if (!(ab > 0.0)) throw SingularityError("alpha_bar is zero at timestep " + std::to_string(t));
    const double s = std::sqrt(ab);
    return lincomb(1.0 / s, z, -std::sqrt(1.0 - ab) / s, eps);
}

Tensor ddim_invert_step(const Tensor& z_prev, int t_prev, int t, const Tensor& eps, const NoiseSchedule& schedule) {
    check_pair(t_prev, t, schedule);
    return transfer(z_prev, eps, schedule.alpha_bar(t_prev), schedule.alpha_bar(t));
}

Tensor ddim_infer_step(const Tensor& z, int t, int t_prev, const Tensor& eps, const NoiseSchedule& schedule) {
    check_pair(t_prev, t, schedule);
    return transfer(z, eps, schedule.alpha_bar(t), schedule.alpha_bar(t_prev));
}

Trajectory ddim_invert(const Tensor& z0, const Predictor& pred, const Condition& c, double omega,
                       const TimestepPlan& plan, const NoiseSchedule& schedule) {
    if (plan.last() > schedule.train_steps()) throw ParameterError("plan exceeds the schedule length");
    Trajectory traj(Direction::inversion);
    traj.push(0, z0);
    for (int k = 1; k <= plan.size(); ++k) {
        const int t_prev = plan.timestep(k - 1);
        const int t = plan.timestep(k);
        const Tensor& z = traj.back().latent;
        const Tensor eps = cfg_combine(pred, z, c, t, omega);
        traj.push(t, ddim_invert_step(z, t_prev, t, eps, schedule));
    }
    return traj;
}

Trajectory ddim_infer(const Tensor& z_last, const Predictor& pred, const Condition& c, double omega,
                      const TimestepPlan& plan, const NoiseSchedule& schedule) {
    if (plan.last() > schedule.train_steps()) throw ParameterError("plan exceeds the schedule length");
    Trajectory traj(Direction::inference);
    traj.push(plan.last(), z_last);
    for (int k = plan.size(); k >= 1; --k) {
        const int t = plan.timestep(k);
        const int t_prev = plan.timestep(k - 1);
        const Tensor& z = traj.back().latent;
        const Tensor eps = cfg_combine(pred, z, c, t, omega);
        traj.push(t_prev, ddim_infer_step(z, t, t_prev, eps, schedule));
    }
    return traj;
}

void save_trajectory(const std::filesystem::path& dir, const Trajectory& trajectory) {
    std::filesystem::create_directories(dir);
    std::ofstream index(dir / "index.csv", std::ios::trunc);
    index << "step,timestep,file\n";
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "step_%04zu.erdt", i);
        write_tensor(dir / name, trajectory[i].latent);
        index << i << ',' << trajectory[i].timestep << ',' << name << '\n';
    }
    std::ofstream manifest(dir / "manifest.txt", std::ios::trunc);
    manifest << "direction = " << to_string(trajectory.direction()) << "\n"
             << "points = " << trajectory.size() << "\n";
    if (!index || !manifest) throw Error("cannot write trajectory to " + dir.string());
}

Trajectory load_trajectory(const std::filesystem::path& dir) {
    std::ifstream manifest(dir / "manifest.txt");
    if (!manifest) throw Error("missing trajectory manifest in " + dir.string());
    std::string line;
    Direction direction = Direction::inversion;
    while (std::getline(manifest, line)) {
        if (line.rfind("direction", 0) == 0) {
            direction = line.find("inference") != std::string::npos ? Direction::inference : Direction::inversion;
        }
    }
    std::ifstream index(dir / "index.csv");
    if (!index || !std::getline(index, line)) throw Error("missing trajectory index in " + dir.string());
    Trajectory traj(direction);
    while (std::getline(index, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string step, timestep, file;
        std::getline(row, step, ',');
        std::getline(row, timestep, ',');
        std::getline(row, file, ',');
        traj.push(std::stoi(timestep), read_tensor(dir / file));
    }
    return traj;
}

}  // namespace erddci
