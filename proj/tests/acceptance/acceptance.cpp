// SPDX-License-Identifier: Apache-2.0
//
// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance <configs-dir>
//
// Uses <configs-dir>/shapes.ini and <configs-dir>/train_gauss.ini. Exit code
// 0 when every criterion passes, 3 otherwise.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "erddci/dci.hpp"
#include "erddci/edit.hpp"
#include "erddci/harness/commands.hpp"
#include "erddci/mlp.hpp"
#include "erddci/oracles.hpp"

using namespace erddci;
using namespace erddci::harness;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void report(int n, const Outcome& o) {
    std::printf("criterion %d: %s %s\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
}

template <typename Fn>
void run(int n, Fn&& fn) {
    try {
        report(n, fn());
    } catch (const std::exception& e) {
        report(n, {false, std::string("error: ") + e.what()});
    }
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// ---- 1, 2: reconstruction sweep on the shapes ----

Outcome exact_reversibility(const ReconSweep& sweep, double seconds) {
    Outcome o;
    double worst_abs = 0.0, worst_ssim = 1.0;
    int cells = 0;
    for (const auto& row : sweep.rows) {
        if (row.method != "erddci") continue;
        worst_abs = std::max(worst_abs, row.scores.max_abs);
        worst_ssim = std::min(worst_ssim, row.scores.ssim.value_or(-1.0));
    }
    for (const auto& c : sweep.grid) cells += c.method == "erddci";
    o.pass = cells == 9 && worst_abs <= 1e-6 && worst_ssim >= 0.9999 && seconds < 30.0;
    o.detail = "cells=" + std::to_string(cells) + " max_abs=" + fmt("%.3g", worst_abs) +
               " min_ssim=" + fmt("%.8f", worst_ssim) + " runtime_s=" + fmt("%.2f", seconds);
    return o;
}

Outcome ddim_accumulation(const ReconSweep& sweep) {
    Outcome o;
    // Grid cells: DDIM mean MSE at least 10x the exact scheme's.
    std::map<std::pair<int, double>, double> er, dd;
    for (const auto& c : sweep.grid) {
        if (c.method == "erddci") er[{c.steps, c.omega}] = c.mean_mse;
        if (c.method == "ddim") dd[{c.steps, c.omega}] = c.mean_mse;
    }
    double min_ratio = INFINITY;
    bool ratio_ok = !er.empty() && er.size() == dd.size();
    for (const auto& [key, e] : er) {
        const double d = dd.at(key);
        ratio_ok = ratio_ok && d >= 10.0 * e && d > 0.0;
        if (e > 0.0) min_ratio = std::min(min_ratio, d / e);
    }
    // Per item and step count: DDIM MSE at omega 3 above omega 1.
    std::map<std::tuple<int, std::size_t, double>, double> item_mse;
    for (const auto& r : sweep.rows) {
        if (r.method == "ddim") item_mse[{r.steps, r.item, r.omega}] = r.scores.mse;
    }
    int trend_total = 0, trend_ok = 0;
    for (const auto& [key, v] : item_mse) {
        const auto& [steps, item, omega] = key;
        if (omega != 1.0) continue;
        const auto hi = item_mse.find({steps, item, 3.0});
        if (hi == item_mse.end()) continue;
        ++trend_total;
        trend_ok += hi->second > v;
    }
    o.pass = ratio_ok && trend_total > 0 && trend_ok == trend_total;
    o.detail = "ddim/erddci_min_ratio=" + (std::isinf(min_ratio) ? std::string("inf (exact scheme mse 0)")
                                                                : fmt("%.3g", min_ratio)) +
               " omega3>omega1 items=" + std::to_string(trend_ok) + "/" + std::to_string(trend_total);
    return o;
}

// ---- 3: constant predictor ----

Outcome linearization_isolation(const Experiment& ex) {
    Outcome o;
    Rng rng(17);
    const ConstantPredictor constant(sample_standard_normal(rng, ex.items.front().latent.shape()),
                                     ex.items.front().condition.dim());
    double worst = 0.0;
    for (const auto& it : ex.items) {
        for (int n : ex.cfg.plan.sweep) {
            const TimestepPlan plan = make_plan(ex.schedule.train_steps(), n);
            for (double w : ex.cfg.dcs.omega_sweep) {
                const Trajectory inv = ddim_invert(it.latent, constant, it.condition, w, plan, ex.schedule);
                const Trajectory inf = ddim_infer(inv.back().latent, constant, it.condition, w, plan, ex.schedule);
                worst = std::max(worst, max_abs_diff(inf.back().latent, it.latent));
            }
        }
    }
    o.pass = worst <= 1e-9;
    o.detail = "constant-predictor ddim max_abs=" + fmt("%.3g", worst);
    return o;
}

// ---- 4: step-inverse algebra ----

Outcome step_inverse() {
    Outcome o;
    Rng rng(2024);
    double worst = 0.0;
    double worst_outside = 0.0;
    int accepted = 0;
    int outside = 0;
    // Linear schedules with alpha_bar(T) >= 1e-6 count toward the 1000 triples.
    // Steeper draws are evaluated the same way and only reported.
    while (accepted < 1000) {
        const int T = 2 + static_cast<int>(rng.below(1999));
        const double b0 = rng.uniform(0.0, 0.01);
        const double b1 = b0 + rng.uniform(0.0, 0.05);
        const NoiseSchedule s = make_linear_schedule(T, b0, b1);
        const int t_prev = static_cast<int>(rng.below(static_cast<std::uint64_t>(T)));
        const int t = t_prev + 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(T - t_prev)));
        const std::size_t dim = 1 + static_cast<std::size_t>(rng.below(64));
        const Tensor z = sample_standard_normal(rng, {dim});
        const Tensor e = sample_standard_normal(rng, {dim});
        const double r = oracle::step_inverse_residual(z, e, t_prev, t, s);
        if (s.alpha_bar(T) >= 1e-6) {
            worst = std::max(worst, r);
            ++accepted;
        } else {
            worst_outside = std::max(worst_outside, r);
            ++outside;
        }
    }
    o.pass = worst <= 1e-9;
    o.detail = "triples=1000 max_residual=" + fmt("%.3g", worst) + " (alpha_bar(T)<1e-6 draws=" +
               std::to_string(outside) + " max_residual_there=" + fmt("%.3g", worst_outside) + ")";
    return o;
}

// ---- 5: call accounting ----

Outcome cost_accounting(const Experiment& ex) {
    Outcome o;
    const auto rows = run_bench(ex);
    bool ok = !rows.empty();
    std::string at50;
    for (const auto& r : rows) {
        const std::uint64_t n = static_cast<std::uint64_t>(r.steps) * (r.omega == 1.0 ? 1 : 2);
        ok = ok && r.ddim_inversion == n && r.erddci_inversion == 2 * n && r.ddim_inference == n &&
             r.erddci_inference == 0 && r.ddim_inversion + r.ddim_inference == r.erddci_inversion + r.erddci_inference &&
             r.inversion_ratio_ok && r.total_ok;
        if (r.steps == 50 && r.omega == 1.0) {
            at50 = " steps=50 omega=1: erddci_inv=" + std::to_string(r.erddci_inversion) +
                   " ddim_inv=" + std::to_string(r.ddim_inversion) + " erddci_total=" +
                   std::to_string(r.erddci_inversion + r.erddci_inference) +
                   " ddim_total=" + std::to_string(r.ddim_inversion + r.ddim_inference);
            ok = ok && r.erddci_inversion == 100 && r.ddim_inversion == 50;
        }
    }
    o.pass = ok && !at50.empty();
    o.detail = "rows=" + std::to_string(rows.size()) + at50;
    return o;
}

// ---- 6: guidance ramp ----

Outcome dcs_schedule() {
    Outcome o;
    const int n = 100;
    int checked = 0;
    double worst = 0.0;
    bool ok = true;
    for (double omega : {1.0, 3.0, 7.5}) {
        for (double eta : {0.0, 0.25, 0.6, 0.9}) {
            for (int t_end : {0, 5, 9}) {
                const DcsConfig c = DcsConfig::make(omega, eta, t_end, n);
                for (int t = 0; t <= n; ++t) {
                    const double got = dcs_scale(t, c);
                    double want;
                    if (t >= c.sigma) want = 1.0;
                    else if (t <= t_end) want = omega;
                    else want = 1.0 + (omega - 1.0) * (c.sigma - t) / (c.sigma - t_end);
                    if (t >= c.sigma) ok = ok && got == 1.0;
                    if (t == t_end && t < c.sigma) ok = ok && got == omega;
                    worst = std::max(worst, std::abs(got - want));
                    ++checked;
                }
                // Linearity: constant first differences across the ramp.
                for (int t = t_end + 1; t + 1 < c.sigma; ++t) {
                    const double d1 = dcs_scale(t, c) - dcs_scale(t + 1, c);
                    const double d0 = dcs_scale(t_end, c) - dcs_scale(t_end + 1, c);
                    worst = std::max(worst, std::abs(d1 - d0));
                }
            }
        }
    }
    o.pass = ok && worst <= 1e-12;
    o.detail = "points=" + std::to_string(checked) + " max_deviation=" + fmt("%.3g", worst);
    return o;
}

// ---- 7, 8: editing ----

Outcome mode_contract(const EditSuite& suite, const Experiment& ex) {
    Outcome o;
    int ok = 0;
    for (const auto& e : suite.edits) ok += e.modes_ok;
    double collapse = 0.0;
    for (double c : suite.collapse_max_abs) collapse = std::max(collapse, c);
    // Independent collapse check on the first item, straight from the library.
    const auto& it = ex.items.front();
    const TimestepPlan plan = make_plan(ex.schedule.train_steps(), ex.cfg.plan.n_steps);
    const InversionRecord rec = dci_invert(it.latent, *ex.predictor, it.condition, 1.0, plan, ex.schedule);
    const EditConfig ec = make_edit_config(ex.cfg, 1.0, plan.size(), it.condition, it.condition);
    const double direct = max_abs_diff(edit_run(rec, ec, *ex.predictor, ex.schedule).edited, joint_infer(rec, ex.schedule).z0);
    collapse = std::max(collapse, direct);
    o.pass = !suite.edits.empty() && ok == static_cast<int>(suite.edits.size()) &&
             suite.collapse_max_abs.size() == ex.items.size() && collapse <= 1e-6;
    o.detail = "mode_logs_ok=" + std::to_string(ok) + "/" + std::to_string(suite.edits.size()) +
               " collapse_max_abs=" + fmt("%.3g", collapse) + " (target=source, all steps JI)";
    return o;
}

Outcome fidelity_trend(const EditSuite& suite, const ExperimentConfig& cfg) {
    Outcome o;
    bool ok = !suite.eta_sweep.empty();
    std::string detail;
    for (EditType type : cfg.edit.types) {
        detail += std::string(" ") + to_string(type) + ":";
        double prev = INFINITY;
        for (const auto& row : suite.eta_sweep) {
            if (row.type != type) continue;
            ok = ok && row.mean_mse_to_original <= prev;
            prev = row.mean_mse_to_original;
            detail += fmt(" %.4g", row.mean_mse_to_original);
        }
    }
    o.pass = ok;
    o.detail = "eta=0.2..0.8 mse" + detail;
    return o;
}

// ---- 9: trajectories ----

Outcome trajectory_divergence(const TrajSuite& traj) {
    Outcome o;
    if (traj.distances.empty() || traj.distance_names.front() != "DIT") return {false, "no DIT series"};
    const auto& dit = traj.distances.front();
    std::vector<double> elapsed(dit.size());
    std::iota(elapsed.begin(), elapsed.end(), 0.0);
    const double rho = spearman(dit, elapsed);
    auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
    const double dit_mean = mean(dit);
    bool edits_closer = traj.distances.size() > 1;
    std::string edits;
    for (std::size_t j = 1; j < traj.distances.size(); ++j) {
        const double m = mean(traj.distances[j]);
        edits_closer = edits_closer && m < dit_mean;
        edits += " " + traj.distance_names[j] + "=" + fmt("%.4g", m);
    }
    o.pass = dit.back() > dit.front() && rho > 0.5 && edits_closer;
    o.detail = "DIT d_initial=" + fmt("%.4g", dit.front()) + " d_final=" + fmt("%.4g", dit.back()) +
               " spearman=" + fmt("%.3f", rho) + " mean_dist DIT=" + fmt("%.4g", dit_mean) + edits;
    return o;
}

// ---- 10: training ----

Outcome training_soundness(const ExperimentConfig& cfg) {
    Outcome o;
    // Gradient check on the configured architecture at its initialization.
    MlpConfig mc;
    mc.latent_dim = cfg.data.dim;
    mc.hidden = cfg.predictor.hidden;
    mc.condition_dim = cfg.data.components;
    mc.train_steps = cfg.schedule.train_steps;
    Rng init(cfg.predictor.init_seed);
    const MlpPredictor model = MlpPredictor::initialized(mc, init);
    const NoiseSchedule schedule = make_linear_schedule(cfg.schedule.train_steps, cfg.schedule.beta_start,
                                                        cfg.schedule.beta_end);
    const GmmDataModel data = make_reference_model(cfg);
    Rng batch_rng(99);
    std::vector<TrainingSample> batch;
    for (int i = 0; i < 16; ++i) batch.push_back(make_training_sample(sampler_from_model(data), schedule, batch_rng, 0.1));
    std::vector<double> grad;
    model.loss_and_gradient(batch, grad);
    MlpPredictor probe(model);
    const oracle::LossFn loss = [&](std::span<const double> p) {
        probe.set_parameters(p);
        return probe.loss(batch);
    };
    Rng pick(100);
    std::vector<std::size_t> slice;
    for (int i = 0; i < 20; ++i) slice.push_back(static_cast<std::size_t>(pick.below(grad.size())));
    const std::vector<double> params(model.parameters().begin(), model.parameters().end());
    const auto fd = oracle::fd_gradient(loss, params, 1e-5, slice);
    double worst_rel = 0.0;
    for (std::size_t j = 0; j < slice.size(); ++j) {
        const double g = grad[slice[j]];
        worst_rel = std::max(worst_rel, std::abs(g - fd[j]) / std::max({std::abs(g), std::abs(fd[j]), 1e-8}));
    }

    // Distance to the closed-form predictor: 10 block means of 5 epochs.
    const TrainReport tr = run_train(cfg);
    const auto& gap = tr.mse_to_optimal;
    constexpr std::size_t block = 5;
    std::vector<double> means;
    for (std::size_t b = 0; b + block <= gap.size(); b += block) {
        means.push_back(std::accumulate(gap.begin() + static_cast<std::ptrdiff_t>(b),
                                        gap.begin() + static_cast<std::ptrdiff_t>(b + block), 0.0) / block);
    }
    bool monotone = means.size() == 10;
    for (std::size_t i = 1; i < means.size(); ++i) monotone = monotone && means[i] <= means[i - 1];
    o.pass = worst_rel < 1e-4 && monotone && means.back() < means.front();
    o.detail = "fd_params=" + std::to_string(slice.size()) + " max_rel_err=" + fmt("%.3g", worst_rel) +
               " block_means(5 epochs):";
    for (double m : means) o.detail += fmt(" %.4g", m);
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: acceptance <configs-dir>\n");
        return kExitConfig;
    }
    const std::filesystem::path dir = argv[1];
    ExperimentConfig shapes_cfg, train_cfg;
    try {
        shapes_cfg = load_config(dir / "shapes.ini");
        train_cfg = load_config(dir / "train_gauss.ini");
    } catch (const std::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    }
    const Experiment ex = make_experiment(shapes_cfg);

    const auto start = std::chrono::steady_clock::now();
    const ReconSweep sweep = run_reconstruct(ex);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    run(1, [&] { return exact_reversibility(sweep, seconds); });
    run(2, [&] { return ddim_accumulation(sweep); });
    run(3, [&] { return linearization_isolation(ex); });
    run(4, [] { return step_inverse(); });
    run(5, [&] { return cost_accounting(ex); });
    run(6, [] { return dcs_schedule(); });
    const EditSuite edits = run_edit(ex);
    run(7, [&] { return mode_contract(edits, ex); });
    run(8, [&] { return fidelity_trend(edits, shapes_cfg); });
    run(9, [&] { return trajectory_divergence(run_traj(ex)); });
    run(10, [&] { return training_soundness(train_cfg); });

    std::printf("%d of 10 criteria passed\n", 10 - failures);
    return failures == 0 ? kExitOk : kExitAssertion;
}
