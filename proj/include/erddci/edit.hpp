// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "erddci/dci.hpp"
#include "erddci/ddim.hpp"
#include "erddci/predictor.hpp"
#include "erddci/schedule.hpp"

namespace erddci {

/// Dynamic guidance schedule on the plan-index axis (t = n at the noisy end,
/// t = 0 at the clean end).
///
/// Guidance is 1 for t >= sigma. Below sigma it ramps linearly,
///   1 + (Omega - 1) / (sigma - t_end) * (sigma - t),
/// and holds at Omega once t <= t_end.
struct DcsConfig {
    double omega = 1.0;  ///< user guidance scale Omega >= 1
    double eta = 0.0;    ///< control factor in [0, 1]
    int t_end = 0;
    int sigma = 0;       ///< derived activation step
    int n_steps = 1;

    /// sigma = (1 - eta) * n rounded to the nearest plan step; exact halves
    /// round down, which adds a joint-inference step.
    static DcsConfig make(double omega, double eta, int t_end, int n_steps);

    /// Throws ConfigError on out-of-range values or, when the ramp is
    /// reachable (sigma > 0), on t_end >= sigma.
    void validate() const;
};

double dcs_scale(int t, const DcsConfig& cfg);

/// Optional latent transform applied after each editing step; receives the
/// step's output latent and the timestep it sits at.
using AttHook = std::function<Tensor(const Tensor&, int)>;

/// Condition used by the joint-inference steps before activation.
enum class JiCondition {
    /// Remove the source noise again, reusing the inversion cache when the
    /// record was built at omega 1 with the source condition. The output
    /// follows the reconstruction exactly until activation.
    source,
    /// Re-predict at the inversion chain under the target condition.
    target,
};

struct EditConfig {
    DcsConfig dcs;
    JiCondition ji_condition = JiCondition::source;
    double strong_m = 0.8, strong_n = 0.2;  ///< reliance on the inversion chain, strong steps
    double ramp_m = 0.5, ramp_n = 0.5;      ///< ramp steps
    int reliance_period = 3;                ///< r
    Condition source;
    Condition target;
    AttHook att_hook;                       ///< identity when empty

    void validate() const;
};

enum class EditMode { ji, dji_strong, dji_ramp };

const char* to_string(EditMode mode) noexcept;

struct EditStepLog {
    int plan_index = 0;  ///< t on the plan axis
    int timestep = 0;    ///< training timestep of the step's start
    EditMode mode = EditMode::ji;
    double omega = 1.0;
    double m = 1.0, n = 0.0;
    double mse_to_aux = 0.0;  ///< between the step output and the auxiliary chain
};

struct EditResult {
    Tensor edited;
    Trajectory trajectory{Direction::inference};
    std::vector<EditStepLog> log;
};

/// One DDIM noise-removal step with a supplied noise tensor.
Tensor g_step(const Tensor& z, int t, int t_prev, const Tensor& eps, const NoiseSchedule& schedule);

/// Joint-inference step: noise predicted at the inversion-chain latent.
Tensor ji_step(const Tensor& z_breve, const Tensor& z_hat, int t, int t_prev, double omega, const Predictor& pred,
               const Condition& c, const AttHook& hook, const NoiseSchedule& schedule);

/// Mixed step: noise predicted at m * z_hat + n * z_breve. Requires m + n = 1
/// (within 1e-12).
Tensor dji_step(const Tensor& z_breve, const Tensor& z_hat, int t, int t_prev, double omega, double m, double n,
                const Predictor& pred, const Condition& c, const AttHook& hook, const NoiseSchedule& schedule);

/// Full editing inference from the auxiliary chain's end point.
///
/// For plan index t from n down to 1: t >= sigma runs a joint-inference step
/// at omega = 1; below sigma the i-th step (i = 1, 2, ...) is a strong mixed
/// step at omega = 1 when (i - 1) mod r == 0 and otherwise a ramp step at
/// omega = dcs_scale(t). Joint-inference steps use `ji_condition` and reuse
/// the record's cached noise when that condition and omega = 1 match the
/// inversion. Mixed steps always use the target condition.
EditResult edit_run(const InversionRecord& rec, const EditConfig& cfg, const Predictor& pred,
                    const NoiseSchedule& schedule);

}  // namespace erddci
