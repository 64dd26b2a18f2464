// SPDX-License-Identifier: Apache-2.0
//
// Experiment suites behind the CLI subcommands. Each `run_*` function
// computes its results in memory; each `cmd_*` function runs it, writes the
// CSV files under the output directory, and returns a process exit code.
//
// Output files and their column order:
//   train_loss.csv        epoch,loss,mse_to_optimal
//   recon_items.csv       steps,omega,method,item,mse,psnr,ssim,max_abs,inversion_calls,inference_calls
//   recon_grid.csv        steps,omega,method,mean_mse,mean_psnr,mean_ssim,min_ssim,max_abs,inversion_calls,inference_calls
//   edit_log.csv          item,type,plan_index,t,mode,omega,m,n,mse_to_aux
//   edit_metrics.csv      item,type,source,target,recon_mse,edit_mse,edit_psnr,edit_ssim
//   edit_eta.csv          type,eta,mean_mse_to_original
//   edit_collapse.csv     item,max_abs_vs_joint_infer
//   bench_counts.csv      steps,omega,ddim_inversion_calls,ddim_inference_calls,ddim_total,erddci_inversion_calls,erddci_inference_calls,erddci_total,inversion_ratio_ok,total_ok
//   bench_timing.csv      steps,omega,ddim_ms,erddci_ms,ratio
//   traj_projection.csv   trajectory,step,timestep,pc1,pc2
//   traj_distance.csv     step,timestep,DIT,<edit types...>
//   traj_summary.csv      trajectory,d_initial,d_final,mean_distance,spearman
//
// All files except bench_timing.csv are byte-for-byte reproducible from the
// configuration and seed.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "erddci/dci.hpp"
#include "erddci/edit.hpp"
#include "erddci/harness/config.hpp"
#include "erddci/harness/datasets.hpp"
#include "erddci/metrics.hpp"
#include "erddci/mlp.hpp"
#include "erddci/schedule.hpp"

namespace erddci::harness {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;
inline constexpr int kExitAssertion = 3;

/// Runs fn(0), ..., fn(n - 1) on a small thread pool. Callers store results
/// by index so the output order never depends on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// Everything a suite needs, built once from a configuration.
struct Experiment {
    ExperimentConfig cfg;
    NoiseSchedule schedule;
    std::vector<Item> items;
    GmmDataModel reference;
    std::unique_ptr<Predictor> predictor;
    double peak = 1.0;
};

Experiment make_experiment(const ExperimentConfig& cfg);

// ---- train ----

struct TrainReport {
    std::vector<double> epoch_loss;
    std::vector<double> mse_to_optimal;  ///< per epoch, on a fixed probe set
    std::unique_ptr<MlpPredictor> model;
};

TrainReport run_train(const ExperimentConfig& cfg);
int cmd_train(const ExperimentConfig& cfg);

// ---- reconstruct ----

struct ReconItemRow {
    int steps = 0;
    double omega = 0.0;
    std::string method;  ///< "erddci", "ddim", or "guided"
    std::size_t item = 0;
    MethodScores scores;
};

struct ReconCell {
    int steps = 0;
    double omega = 0.0;
    std::string method;
    double mean_mse = 0.0;
    double mean_psnr = 0.0;
    std::optional<double> mean_ssim;
    std::optional<double> min_ssim;
    double max_abs = 0.0;
    std::uint64_t inversion_calls = 0;  ///< per item
    std::uint64_t inference_calls = 0;
};

struct ReconSweep {
    std::vector<ReconItemRow> rows;
    std::vector<ReconCell> grid;
};

/// Guided reconstruction: invert at omega 1, then run the edit loop with
/// target = source and the DCS ramp up to `omega`.
MethodScores guided_reconstruct(const Tensor& z0, const Condition& c, double omega, const TimestepPlan& plan,
                                const Experiment& ex);

ReconSweep run_reconstruct(const Experiment& ex);
int cmd_reconstruct(const ExperimentConfig& cfg);

// ---- edit ----

struct EditItemResult {
    std::size_t item = 0;
    EditType type = EditType::t1;
    std::size_t source_label = 0;
    std::size_t target_label = 0;
    EditResult result;
    double recon_mse = 0.0;
    MethodScores edit_scores;
    bool modes_ok = false;
};

struct EtaRow {
    EditType type = EditType::t1;
    double eta = 0.0;
    double mean_mse_to_original = 0.0;
};

struct EditSuite {
    std::vector<EditItemResult> edits;
    std::vector<EtaRow> eta_sweep;
    std::vector<double> collapse_max_abs;  ///< per item
};

EditConfig make_edit_config(const ExperimentConfig& cfg, double eta, int n_steps, const Condition& source,
                            const Condition& target);

/// Replays the loop's mode schedule from the configuration alone and
/// compares it with the log entry by entry.
bool check_mode_schedule(const std::vector<EditStepLog>& log, const EditConfig& cfg);

Condition target_condition(const ExperimentConfig& cfg, const Item& item, EditType type);

EditSuite run_edit(const Experiment& ex);
int cmd_edit(const ExperimentConfig& cfg);

// ---- bench ----

struct BenchRow {
    int steps = 0;
    double omega = 0.0;
    std::uint64_t ddim_inversion = 0, ddim_inference = 0;
    std::uint64_t erddci_inversion = 0, erddci_inference = 0;
    double ddim_ms = 0.0, erddci_ms = 0.0;
    bool inversion_ratio_ok = false;
    bool total_ok = false;
};

std::vector<BenchRow> run_bench(const Experiment& ex);
int cmd_bench(const ExperimentConfig& cfg);

// ---- traj ----

struct TrajSuite {
    std::vector<NamedTrajectory> trajectories;  ///< z0, JIT, DIT, then one per edit type
    TrajectoryProjection projection;
    std::vector<std::string> distance_names;  ///< DIT, then edit types
    std::vector<std::vector<double>> distances;  ///< distance to JIT per step
    std::vector<double> spearman;  ///< d(t) against elapsed steps
    double jit_endpoint_gap = 0.0;  ///< projected distance between JIT end and z0
};

TrajSuite run_traj(const Experiment& ex);
int cmd_traj(const ExperimentConfig& cfg);

/// "%.17g" formatting shared by every CSV writer.
std::string format_double(double v);

}  // namespace erddci::harness
