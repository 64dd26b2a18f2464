// SPDX-License-Identifier: Apache-2.0
#include "erddci/edit.hpp"

#include <cmath>

#include "erddci/errors.hpp"
#include "erddci/metrics.hpp"

namespace erddci {

DcsConfig DcsConfig::make(double omega, double eta, int t_end, int n_steps) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw ConfigError("eta must lie in [0, 1]");
    if (n_steps < 1) throw ConfigError("DCS needs at least one step");
    DcsConfig cfg;
    cfg.omega = omega;
    cfg.eta = eta;
    cfg.t_end = t_end;
    cfg.n_steps = n_steps;
    const double raw = (1.0 - eta) * n_steps;
    cfg.sigma = static_cast<int>(std::ceil(raw - 0.5));
    cfg.validate();
    return cfg;
}

void DcsConfig::validate() const {
    if (!(omega >= 1.0) || !std::isfinite(omega)) throw ConfigError("guidance scale Omega must be >= 1");
    if (!(eta >= 0.0 && eta <= 1.0)) throw ConfigError("eta must lie in [0, 1]");
    if (sigma < 0 || sigma > n_steps) throw ConfigError("sigma must lie in [0, n_steps]");
    if (t_end < 0) throw ConfigError("t_end must be >= 0");
    if (sigma > 0 && t_end >= sigma) {
        throw ConfigError("t_end (" + std::to_string(t_end) + ") must be below sigma (" + std::to_string(sigma) + ")");
    }
}

double dcs_scale(int t, const DcsConfig& cfg) {
    if (t < 0 || t > cfg.n_steps) throw ParameterError("dcs_scale: t outside the plan");
    if (t >= cfg.sigma) return 1.0;
    if (cfg.t_end >= cfg.sigma) throw ConfigError("dcs_scale: sigma must exceed t_end");
    if (t <= cfg.t_end) return cfg.omega;
    return 1.0 + (cfg.omega - 1.0) / (cfg.sigma - cfg.t_end) * (cfg.sigma - t);
}

void EditConfig::validate() const {
    dcs.validate();
    if (std::abs(strong_m + strong_n - 1.0) > 1e-12 || std::abs(ramp_m + ramp_n - 1.0) > 1e-12) {
        throw ConfigError("dependency factors must satisfy m + n = 1");
    }
    if (reliance_period < 1) throw ConfigError("reliance period r must be >= 1");
    if (source.dim() != target.dim()) throw ConfigError("source and target conditions differ in dimension");
}

const char* to_string(EditMode mode) noexcept {
    switch (mode) {
        case EditMode::ji: return "JI";
        case EditMode::dji_strong: return "DJI-strong";
        case EditMode::dji_ramp: return "DJI-ramp";
    }
    return "?";
}

namespace {

Tensor apply_hook(const AttHook& hook, Tensor z, int t_prev) {
    if (!hook) return z;
    Tensor out = hook(z, t_prev);
    require_same_shape(out, z, "attention hook output");
    return out;
}

}  // namespace

Tensor g_step(const Tensor& z, int t, int t_prev, const Tensor& eps, const NoiseSchedule& schedule) {
    return ddim_infer_step(z, t, t_prev, eps, schedule);
}

Tensor ji_step(const Tensor& z_breve, const Tensor& z_hat, int t, int t_prev, double omega, const Predictor& pred,
               const Condition& c, const AttHook& hook, const NoiseSchedule& schedule) {
    require_same_shape(z_breve, z_hat, "ji_step");
    const Tensor eps = cfg_combine(pred, z_hat, c, t, omega);
    return apply_hook(hook, g_step(z_breve, t, t_prev, eps, schedule), t_prev);
}

Tensor dji_step(const Tensor& z_breve, const Tensor& z_hat, int t, int t_prev, double omega, double m, double n,
                const Predictor& pred, const Condition& c, const AttHook& hook, const NoiseSchedule& schedule) {
    if (std::abs(m + n - 1.0) > 1e-12) throw ConfigError("dji_step needs m + n = 1");
    const Tensor mix = lincomb(m, z_hat, n, z_breve);
    const Tensor eps = cfg_combine(pred, mix, c, t, omega);
    return apply_hook(hook, g_step(z_breve, t, t_prev, eps, schedule), t_prev);
}

EditResult edit_run(const InversionRecord& rec, const EditConfig& cfg, const Predictor& pred,
                    const NoiseSchedule& schedule) {
    rec.validate();
    cfg.validate();
    const auto& plan = rec.plan;
    if (cfg.dcs.n_steps != plan.size()) throw ConfigError("DCS step count does not match the inversion plan");
    if (cfg.target.dim() != pred.condition_dim()) throw ConfigError("target condition dimension mismatch");
    const Condition& ji_cond = cfg.ji_condition == JiCondition::source ? cfg.source : cfg.target;
    const bool cache_valid = ji_cond == rec.condition_used && rec.omega_used == 1.0;

    EditResult out;
    out.trajectory.push(plan.last(), rec.aux_last());
    int post_activation = 0;
    for (int k = plan.size(); k >= 1; --k) {
        const int t = plan.timestep(k);
        const int t_prev = plan.timestep(k - 1);
        const Tensor& z = out.trajectory.back().latent;
        const Tensor& z_hat = rec.ddim_chain[static_cast<std::size_t>(k)].latent;
        EditStepLog entry;
        entry.plan_index = k;
        entry.timestep = t;
        Tensor next;
        try {
            if (k >= cfg.dcs.sigma) {
                entry.mode = EditMode::ji;
                entry.omega = 1.0;
                entry.m = 1.0;
                entry.n = 0.0;
                if (cache_valid) {
                    next = apply_hook(cfg.att_hook,
                                      g_step(z, t, t_prev, rec.cached_eps[static_cast<std::size_t>(k - 1)], schedule),
                                      t_prev);
                } else {
                    next = ji_step(z, z_hat, t, t_prev, 1.0, pred, ji_cond, cfg.att_hook, schedule);
                }
            } else {
                ++post_activation;
                if ((post_activation - 1) % cfg.reliance_period == 0) {
                    entry.mode = EditMode::dji_strong;
                    entry.omega = 1.0;
                    entry.m = cfg.strong_m;
                    entry.n = cfg.strong_n;
                } else {
                    entry.mode = EditMode::dji_ramp;
                    entry.omega = dcs_scale(k, cfg.dcs);
                    entry.m = cfg.ramp_m;
                    entry.n = cfg.ramp_n;
                }
                next = dji_step(z, z_hat, t, t_prev, entry.omega, entry.m, entry.n, pred, cfg.target, cfg.att_hook,
                                schedule);
            }
        } catch (const std::exception& e) {
            throw StepError(k, e.what());
        }
        entry.mse_to_aux = mse(next, rec.aux_chain[static_cast<std::size_t>(k - 1)].latent);
        out.log.push_back(entry);
        out.trajectory.push(t_prev, std::move(next));
    }
    out.edited = out.trajectory.back().latent;
    return out;
}

}  // namespace erddci
