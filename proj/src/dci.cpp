// SPDX-License-Identifier: Apache-2.0
#include "erddci/dci.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "erddci/errors.hpp"
#include "erddci/tensor_file.hpp"

namespace erddci {

void InversionRecord::validate() const {
    const auto n = static_cast<std::size_t>(plan.size());
    if (ddim_chain.size() != n + 1 || aux_chain.size() != n + 1) {
        throw IntegrityError("inversion chains do not match the plan length");
    }
    if (cached_eps.size() != n) {
        throw IntegrityError("expected " + std::to_string(n) + " cached noise tensors, found " +
                             std::to_string(cached_eps.size()));
    }
    if (!(ddim_chain.front().latent == aux_chain.front().latent)) {
        throw IntegrityError("both chains must start at the same clean latent");
    }
    for (std::size_t k = 0; k <= n; ++k) {
        const int t = plan.timestep(static_cast<int>(k));
        if (ddim_chain[k].timestep != t || aux_chain[k].timestep != t) {
            throw IntegrityError("chain timesteps disagree with the plan");
        }
    }
    for (const auto& e : cached_eps) {
        if (!e.same_shape(aux_chain.front().latent)) throw IntegrityError("cached noise has the wrong shape");
    }
}

InversionRecord dci_invert(const Tensor& z0, const Predictor& pred, const Condition& c, double omega,
                           const TimestepPlan& plan, const NoiseSchedule& schedule) {
    if (z0.empty()) throw ShapeError("dci_invert needs a non-empty latent");
    if (plan.last() > schedule.train_steps()) throw ParameterError("plan exceeds the schedule length");
    InversionRecord rec{plan, Trajectory(Direction::inversion), Trajectory(Direction::inversion), {}, omega, c};
    rec.omega_used = omega;
    rec.condition_used = c;
    rec.ddim_chain.push(0, z0);
    rec.aux_chain.push(0, z0);
    rec.cached_eps.reserve(static_cast<std::size_t>(plan.size()));
    for (int k = 1; k <= plan.size(); ++k) {
        const int t_prev = plan.timestep(k - 1);
        const int t = plan.timestep(k);
        try {
            const Tensor& hat_prev = rec.ddim_chain.back().latent;
            const Tensor eps_prev = cfg_combine(pred, hat_prev, c, t, omega);
            Tensor hat = ddim_invert_step(hat_prev, t_prev, t, eps_prev, schedule);
            Tensor eps = cfg_combine(pred, hat, c, t, omega);
            Tensor bar = ddim_invert_step(rec.aux_chain.back().latent, t_prev, t, eps, schedule);
            rec.ddim_chain.push(t, std::move(hat));
            rec.aux_chain.push(t, std::move(bar));
            rec.cached_eps.push_back(std::move(eps));
        } catch (const StepError&) {
            throw;
        } catch (const std::exception& e) {
            throw StepError(k, e.what());
        }
    }
    return rec;
}

JointInferResult joint_infer(const InversionRecord& rec, const NoiseSchedule& schedule) {
    return joint_infer(rec, schedule, JointInferOptions{}, nullptr);
}

JointInferResult joint_infer(const InversionRecord& rec, const NoiseSchedule& schedule,
                             const JointInferOptions& options, const Predictor* pred) {
    rec.validate();
    if (options.source != NoiseSource::cached && pred == nullptr) {
        throw ParameterError("recompute modes need a predictor");
    }
    const double omega = options.omega.value_or(rec.omega_used);
    const Condition& cond = options.condition ? *options.condition : rec.condition_used;
    const auto& plan = rec.plan;

    JointInferResult out;
    out.trajectory.push(plan.last(), rec.aux_last());
    for (int k = plan.size(); k >= 1; --k) {
        const int t = plan.timestep(k);
        const int t_prev = plan.timestep(k - 1);
        const Tensor& z = out.trajectory.back().latent;
        Tensor eps;
        switch (options.source) {
            case NoiseSource::cached:
                eps = rec.cached_eps[static_cast<std::size_t>(k - 1)];
                break;
            case NoiseSource::recompute_on_ddim_chain:
                eps = cfg_combine(*pred, rec.ddim_chain[static_cast<std::size_t>(k)].latent, cond, t, omega);
                break;
            case NoiseSource::recompute_on_current:
                eps = cfg_combine(*pred, z, cond, t, omega);
                break;
        }
        out.trajectory.push(t_prev, ddim_infer_step(z, t, t_prev, eps, schedule));
    }
    out.z0 = out.trajectory.back().latent;
    return out;
}

ReconReport reconstruct(const Tensor& z0, const Predictor& pred, const Condition& c, double omega,
                        const TimestepPlan& plan, const NoiseSchedule& schedule, double peak) {
    if (z0.empty()) throw ShapeError("reconstruct needs a non-empty latent");
    using clock = std::chrono::steady_clock;
    auto ms_since = [](clock::time_point start) {
        return std::chrono::duration<double, std::milli>(clock::now() - start).count();
    };
    CountingPredictor counter(pred);
    ReconReport report;

    auto start = clock::now();
    const InversionRecord rec = dci_invert(z0, counter, c, omega, plan, schedule);
    const std::uint64_t inv_calls = counter.call_count();
    const JointInferResult joint = joint_infer(rec, schedule);
    report.erddci = score(z0, joint.z0, peak);
    report.erddci.inversion_calls = inv_calls;
    report.erddci.inference_calls = counter.call_count() - inv_calls;
    report.erddci.wall_ms = ms_since(start);

    counter.reset_call_count();
    start = clock::now();
    const Trajectory inv = ddim_invert(z0, counter, c, omega, plan, schedule);
    const std::uint64_t ddim_inv_calls = counter.call_count();
    const Trajectory inf = ddim_infer(inv.back().latent, counter, c, omega, plan, schedule);
    report.ddim = score(z0, inf.back().latent, peak);
    report.ddim.inversion_calls = ddim_inv_calls;
    report.ddim.inference_calls = counter.call_count() - ddim_inv_calls;
    report.ddim.wall_ms = ms_since(start);
    return report;
}

void save_record(const std::filesystem::path& dir, const InversionRecord& rec) {
    rec.validate();
    std::filesystem::create_directories(dir / "eps");
    save_trajectory(dir / "ddim_chain", rec.ddim_chain);
    save_trajectory(dir / "aux_chain", rec.aux_chain);
    for (std::size_t k = 0; k < rec.cached_eps.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "eps_%04zu.erdt", k + 1);
        write_tensor(dir / "eps" / name, rec.cached_eps[k]);
    }
    std::ofstream params(dir / "params.txt", std::ios::trunc);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", rec.omega_used);
    params << "omega = " << buf << "\ncondition =";
    for (double v : rec.condition_used.values()) {
        std::snprintf(buf, sizeof buf, " %.17g", v);
        params << buf;
    }
    params << "\nplan =";
    for (int s : rec.plan.steps()) params << ' ' << s;
    params << '\n';
    if (!params) throw Error("cannot write record parameters in " + dir.string());
}

InversionRecord load_record(const std::filesystem::path& dir) {
    std::ifstream params(dir / "params.txt");
    if (!params) throw Error("missing record parameters in " + dir.string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(params, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        key.erase(key.find_last_not_of(' ') + 1);
        kv[key] = line.substr(eq + 1);
    }
    std::vector<int> steps;
    {
        std::istringstream in(kv["plan"]);
        for (int s; in >> s;) steps.push_back(s);
    }
    std::vector<double> cond;
    {
        std::istringstream in(kv["condition"]);
        for (double v; in >> v;) cond.push_back(v);
    }
    InversionRecord rec{TimestepPlan(std::move(steps)), Trajectory(Direction::inversion), Trajectory(Direction::inversion), {}, 1.0, Condition()};
    rec.omega_used = std::stod(kv.at("omega"));
    rec.condition_used = Condition(std::move(cond));
    rec.ddim_chain = load_trajectory(dir / "ddim_chain");
    rec.aux_chain = load_trajectory(dir / "aux_chain");
    for (int k = 1; k <= rec.plan.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "eps_%04d.erdt", k);
        rec.cached_eps.push_back(read_tensor(dir / "eps" / name));
    }
    rec.validate();
    return rec;
}

}  // namespace erddci
