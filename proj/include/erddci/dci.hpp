// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "erddci/ddim.hpp"
#include "erddci/metrics.hpp"
#include "erddci/predictor.hpp"
#include "erddci/schedule.hpp"

namespace erddci {

/// Output of dual-chain inversion.
///
/// `ddim_chain` is the ordinary DDIM inversion chain. `aux_chain` starts at
/// the same z0 and at plan step k receives the guided noise evaluated at
/// ddim_chain[k] (the *destination* of the ordinary step). That noise is
/// kept in `cached_eps[k - 1]`, and removing it again with the inference
/// step walks the auxiliary chain back exactly.
struct InversionRecord {
    TimestepPlan plan;
    Trajectory ddim_chain{Direction::inversion};
    Trajectory aux_chain{Direction::inversion};
    std::vector<Tensor> cached_eps;
    double omega_used = 1.0;
    Condition condition_used;

    /// Throws IntegrityError when the chains, cache, and plan disagree.
    void validate() const;

    const Tensor& aux_last() const { return aux_chain.back().latent; }
    const Tensor& ddim_last() const { return ddim_chain.back().latent; }
};

/// Stage 1: runs the DDIM chain and the auxiliary chain side by side.
/// Costs two guided evaluations per plan step.
InversionRecord dci_invert(const Tensor& z0, const Predictor& pred, const Condition& c, double omega,
                           const TimestepPlan& plan, const NoiseSchedule& schedule);

/// Where joint inference takes the noise it removes at each step.
enum class NoiseSource {
    /// The tensors cached by dci_invert; no predictor calls.
    cached,
    /// Re-evaluate the guided noise at ddim_chain[k]. Bit-identical to
    /// `cached` when settings match, because predictors are pure.
    recompute_on_ddim_chain,
    /// Re-evaluate at the current inference latent (plain DDIM sampling
    /// started from the auxiliary chain's end point).
    recompute_on_current,
};

struct JointInferOptions {
    NoiseSource source = NoiseSource::cached;
    /// Overrides for the recompute modes; default to the record's settings.
    std::optional<double> omega;
    std::optional<Condition> condition;
};

struct JointInferResult {
    Tensor z0;
    Trajectory trajectory{Direction::inference};
};

/// Stage 2: starting at the auxiliary chain's last latent, removes the
/// cached noise step by step.
JointInferResult joint_infer(const InversionRecord& rec, const NoiseSchedule& schedule);

/// Stage 2 with an explicit noise source. `pred` is required for the
/// recompute modes.
JointInferResult joint_infer(const InversionRecord& rec, const NoiseSchedule& schedule,
                             const JointInferOptions& options, const Predictor* pred);

/// dci_invert + joint_infer and a plain DDIM round trip, both scored
/// against z0 with the given peak value.
ReconReport reconstruct(const Tensor& z0, const Predictor& pred, const Condition& c, double omega,
                        const TimestepPlan& plan, const NoiseSchedule& schedule, double peak = 1.0);

/// Directory layout: ddim_chain/, aux_chain/ (trajectories), eps/ (one
/// tensor file per plan step), params.txt (omega, condition, plan).
void save_record(const std::filesystem::path& dir, const InversionRecord& rec);
InversionRecord load_record(const std::filesystem::path& dir);

}  // namespace erddci
