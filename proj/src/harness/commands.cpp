// SPDX-License-Identifier: Apache-2.0
#include "erddci/harness/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "erddci/errors.hpp"
#include "erddci/gmm.hpp"
#include "erddci/tensor_file.hpp"

namespace erddci::harness {
namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

namespace {

std::ofstream open_csv(const fs::path& dir, const std::string& name, const std::string& header) {
    fs::create_directories(dir);
    std::ofstream out(dir / name, std::ios::trunc | std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / name).string());
    out << header << '\n';
    return out;
}

std::string format_optional(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

NoiseSchedule schedule_from(const ExperimentConfig& cfg) {
    return make_linear_schedule(cfg.schedule.train_steps, cfg.schedule.beta_start, cfg.schedule.beta_end);
}

std::size_t condition_dim(const ExperimentConfig& cfg) {
    return cfg.data.kind == DataKind::shapes32 ? kShapeKinds : cfg.data.components;
}

std::size_t latent_dim(const ExperimentConfig& cfg) {
    return cfg.data.kind == DataKind::shapes32 ? cfg.data.side * cfg.data.side : cfg.data.dim;
}

std::unique_ptr<Predictor> make_predictor(const ExperimentConfig& cfg, const GmmDataModel& reference,
                                          const NoiseSchedule& schedule) {
    switch (cfg.predictor.kind) {
        case PredictorKind::constant:
            return std::make_unique<ConstantPredictor>(Tensor::full({1}, cfg.predictor.constant_value),
                                                       condition_dim(cfg));
        case PredictorKind::gmm: return std::make_unique<GmmPredictor>(reference, schedule);
        case PredictorKind::mlp: {
            if (!cfg.predictor.checkpoint) throw ConfigError("predictor.kind = mlp needs predictor.checkpoint");
            auto model = std::make_unique<MlpPredictor>(load_checkpoint(*cfg.predictor.checkpoint));
            if (model->config().latent_dim != latent_dim(cfg) || model->condition_dim() != condition_dim(cfg) ||
                model->config().train_steps != cfg.schedule.train_steps) {
                throw ConfigError("checkpoint does not match the configured dataset or schedule");
            }
            return model;
        }
    }
    throw ConfigError("unknown predictor kind");
}

}  // namespace

Experiment make_experiment(const ExperimentConfig& cfg) {
    Experiment ex{cfg, schedule_from(cfg), make_items(cfg), make_reference_model(cfg), nullptr, 1.0};
    ex.predictor = make_predictor(cfg, ex.reference, ex.schedule);
    ex.peak = peak_value(cfg, ex.items);
    return ex;
}

// ---- train ----

TrainReport run_train(const ExperimentConfig& cfg) {
    const NoiseSchedule schedule = schedule_from(cfg);
    const GmmDataModel reference = make_reference_model(cfg);
    const GmmPredictor optimal(reference, schedule);

    MlpConfig mc;
    mc.latent_dim = latent_dim(cfg);
    mc.hidden = cfg.predictor.hidden;
    mc.condition_dim = condition_dim(cfg);
    mc.train_steps = cfg.schedule.train_steps;
    Rng init_rng(cfg.predictor.init_seed);
    TrainReport report;
    report.model = std::make_unique<MlpPredictor>(MlpPredictor::initialized(mc, init_rng));

    CleanSampler sampler;
    if (cfg.data.kind == DataKind::gmm_samples) {
        sampler = sampler_from_model(reference);
    } else {
        std::vector<Tensor> latents;
        std::vector<Condition> conds;
        for (auto& it : make_shapes(cfg.data.seed, std::max(cfg.data.count, cfg.predictor.fit_samples), cfg.data.side)) {
            latents.push_back(std::move(it.latent));
            conds.push_back(std::move(it.condition));
        }
        sampler = sampler_from_dataset(std::move(latents), std::move(conds));
    }

    // Fixed probe set for the distance to the analytic predictor.
    Rng probe_rng(cfg.data.seed + 1);
    std::vector<TrainingSample> probes;
    std::vector<Tensor> probe_targets;
    for (int i = 0; i < 256; ++i) {
        TrainingSample s = make_training_sample(sampler, schedule, probe_rng, 0.0);
        probe_targets.push_back(optimal.predict(s.noisy, s.condition, s.t));
        probes.push_back(std::move(s));
    }
    auto mse_to_optimal = [&](const MlpPredictor& m) {
        double acc = 0.0;
        for (std::size_t i = 0; i < probes.size(); ++i) {
            acc += mse(m.predict(probes[i].noisy, probes[i].condition, probes[i].t), probe_targets[i]);
        }
        return acc / static_cast<double>(probes.size());
    };

    TrainOptions opts;
    opts.epochs = cfg.predictor.epochs;
    opts.steps_per_epoch = cfg.predictor.steps_per_epoch;
    opts.batch_size = cfg.predictor.batch_size;
    opts.learning_rate = cfg.predictor.learning_rate;
    opts.condition_dropout = cfg.predictor.condition_dropout;
    opts.cosine_decay = cfg.predictor.cosine_decay;
    Rng train_rng(cfg.data.seed);
    const TrainResult result = mlp_train(*report.model, sampler, schedule, train_rng, opts,
                                         [&](int, const MlpPredictor& m) {
                                             report.mse_to_optimal.push_back(mse_to_optimal(m));
                                         });
    report.epoch_loss = result.epoch_loss;
    return report;
}

int cmd_train(const ExperimentConfig& cfg) {
    const TrainReport report = run_train(cfg);
    save_checkpoint(cfg.out_dir / "checkpoint", *report.model);
    auto out = open_csv(cfg.out_dir, "train_loss.csv", "epoch,loss,mse_to_optimal");
    for (std::size_t e = 0; e < report.epoch_loss.size(); ++e) {
        out << e + 1 << ',' << format_double(report.epoch_loss[e]) << ','
            << format_double(report.mse_to_optimal[e]) << '\n';
    }
    return kExitOk;
}

// ---- reconstruct ----

EditConfig make_edit_config(const ExperimentConfig& cfg, double eta, int n_steps, const Condition& source,
                            const Condition& target) {
    EditConfig ec;
    ec.dcs = DcsConfig::make(cfg.dcs.omega, eta, cfg.dcs.t_end, n_steps);
    ec.strong_m = cfg.dcs.strong_m;
    ec.strong_n = cfg.dcs.strong_n;
    ec.ramp_m = cfg.dcs.m;
    ec.ramp_n = cfg.dcs.n;
    ec.reliance_period = cfg.dcs.r;
    ec.ji_condition = cfg.edit.ji_uses_target ? JiCondition::target : JiCondition::source;
    ec.source = source;
    ec.target = target;
    return ec;
}

MethodScores guided_reconstruct(const Tensor& z0, const Condition& c, double omega, const TimestepPlan& plan,
                                const Experiment& ex) {
    CountingPredictor counter(*ex.predictor);
    const InversionRecord rec = dci_invert(z0, counter, c, 1.0, plan, ex.schedule);
    const std::uint64_t inv = counter.call_count();
    EditConfig ec = make_edit_config(ex.cfg, ex.cfg.dcs.eta, plan.size(), c, c);
    ec.dcs = DcsConfig::make(omega, ex.cfg.dcs.eta, ex.cfg.dcs.t_end, plan.size());
    const EditResult res = edit_run(rec, ec, counter, ex.schedule);
    MethodScores s = score(z0, res.edited, ex.peak);
    s.inversion_calls = inv;
    s.inference_calls = counter.call_count() - inv;
    return s;
}

ReconSweep run_reconstruct(const Experiment& ex) {
    const auto& steps = ex.cfg.plan.sweep;
    const auto& omegas = ex.cfg.dcs.omega_sweep;
    const std::size_t cells = steps.size() * omegas.size();
    const std::size_t n_items = ex.items.size();
    // per item: cells x (erddci, ddim, optional guided)
    std::vector<std::vector<ReconReport>> reports(n_items, std::vector<ReconReport>(cells));
    parallel_for(n_items, [&](std::size_t i) {
        const Item& it = ex.items[i];
        for (std::size_t s = 0; s < steps.size(); ++s) {
            const TimestepPlan plan = make_plan(ex.schedule.train_steps(), steps[s]);
            for (std::size_t w = 0; w < omegas.size(); ++w) {
                ReconReport r = reconstruct(it.latent, *ex.predictor, it.condition, omegas[w], plan, ex.schedule,
                                            ex.peak);
                if (omegas[w] >= 1.0) r.guided = guided_reconstruct(it.latent, it.condition, omegas[w], plan, ex);
                reports[i][s * omegas.size() + w] = std::move(r);
            }
        }
    });

    ReconSweep sweep;
    for (std::size_t s = 0; s < steps.size(); ++s) {
        for (std::size_t w = 0; w < omegas.size(); ++w) {
            const std::size_t cell = s * omegas.size() + w;
            for (const char* method : {"erddci", "ddim", "guided"}) {
                const std::string name = method;
                ReconCell agg;
                agg.steps = steps[s];
                agg.omega = omegas[w];
                agg.method = name;
                bool any = false;
                double ssim_sum = 0.0;
                for (std::size_t i = 0; i < n_items; ++i) {
                    const ReconReport& r = reports[i][cell];
                    const MethodScores* m = name == "erddci" ? &r.erddci
                                            : name == "ddim" ? &r.ddim
                                            : (r.guided ? &*r.guided : nullptr);
                    if (!m) continue;
                    any = true;
                    MethodScores stable = *m;
                    stable.wall_ms = 0.0;
                    sweep.rows.push_back(ReconItemRow{steps[s], omegas[w], name, i, stable});
                    agg.mean_mse += m->mse;
                    agg.mean_psnr += m->psnr;
                    if (m->ssim) {
                        ssim_sum += *m->ssim;
                        agg.min_ssim = agg.min_ssim ? std::min(*agg.min_ssim, *m->ssim) : *m->ssim;
                    }
                    agg.max_abs = std::max(agg.max_abs, m->max_abs);
                    agg.inversion_calls = m->inversion_calls;
                    agg.inference_calls = m->inference_calls;
                }
                if (!any) continue;
                const double n = static_cast<double>(n_items);
                agg.mean_mse /= n;
                agg.mean_psnr /= n;
                if (agg.min_ssim) agg.mean_ssim = ssim_sum / n;
                sweep.grid.push_back(agg);
            }
        }
    }
    return sweep;
}

int cmd_reconstruct(const ExperimentConfig& cfg) {
    const Experiment ex = make_experiment(cfg);
    const ReconSweep sweep = run_reconstruct(ex);
    auto items = open_csv(cfg.out_dir, "recon_items.csv",
                          "steps,omega,method,item,mse,psnr,ssim,max_abs,inversion_calls,inference_calls");
    for (const auto& r : sweep.rows) {
        items << r.steps << ',' << format_double(r.omega) << ',' << r.method << ',' << r.item << ','
              << format_double(r.scores.mse) << ',' << format_double(r.scores.psnr) << ','
              << format_optional(r.scores.ssim) << ',' << format_double(r.scores.max_abs) << ','
              << r.scores.inversion_calls << ',' << r.scores.inference_calls << '\n';
    }
    auto grid = open_csv(cfg.out_dir, "recon_grid.csv",
                         "steps,omega,method,mean_mse,mean_psnr,mean_ssim,min_ssim,max_abs,inversion_calls,"
                         "inference_calls");
    for (const auto& c : sweep.grid) {
        grid << c.steps << ',' << format_double(c.omega) << ',' << c.method << ',' << format_double(c.mean_mse)
             << ',' << format_double(c.mean_psnr) << ',' << format_optional(c.mean_ssim) << ','
             << format_optional(c.min_ssim) << ',' << format_double(c.max_abs) << ',' << c.inversion_calls << ','
             << c.inference_calls << '\n';
    }
    return kExitOk;
}

// ---- edit ----

bool check_mode_schedule(const std::vector<EditStepLog>& log, const EditConfig& cfg) {
    const int n = cfg.dcs.n_steps;
    if (static_cast<int>(log.size()) != n) return false;
    int i = 0;
    for (int j = 0; j < n; ++j) {
        const int k = n - j;
        const EditStepLog& e = log[static_cast<std::size_t>(j)];
        if (e.plan_index != k) return false;
        EditMode mode;
        double omega, m, nn;
        if (k >= cfg.dcs.sigma) {
            mode = EditMode::ji, omega = 1.0, m = 1.0, nn = 0.0;
        } else {
            ++i;
            if ((i - 1) % cfg.reliance_period == 0) {
                mode = EditMode::dji_strong, omega = 1.0, m = cfg.strong_m, nn = cfg.strong_n;
            } else {
                mode = EditMode::dji_ramp, omega = dcs_scale(k, cfg.dcs), m = cfg.ramp_m, nn = cfg.ramp_n;
            }
        }
        if (e.mode != mode || e.omega != omega || e.m != m || e.n != nn) return false;
    }
    return true;
}

Condition target_condition(const ExperimentConfig& cfg, const Item& item, EditType type) {
    const std::size_t K = item.condition.dim();
    const std::size_t target = cfg.edit.target ? *cfg.edit.target : (item.label + 1) % K;
    return edit_condition(type, item.condition, target, cfg.edit.mix, cfg.edit.style_scale, cfg.data.seed);
}

EditSuite run_edit(const Experiment& ex) {
    const auto& cfg = ex.cfg;
    const TimestepPlan plan = make_plan(ex.schedule.train_steps(), cfg.plan.n_steps);
    const std::size_t n_items = ex.items.size();
    const std::size_t n_types = cfg.edit.types.size();
    const std::size_t n_eta = cfg.edit.eta_sweep.size();

    std::vector<EditItemResult> edits(n_items * n_types);
    std::vector<double> eta_mse(n_items * n_types * n_eta, 0.0);
    std::vector<double> collapse(n_items, 0.0);
    parallel_for(n_items, [&](std::size_t i) {
        const Item& it = ex.items[i];
        const InversionRecord rec = dci_invert(it.latent, *ex.predictor, it.condition, 1.0, plan, ex.schedule);
        const JointInferResult recon = joint_infer(rec, ex.schedule);
        const double recon_mse = mse(recon.z0, it.latent);

        // target = source with the guided range empty must give joint inference back
        const EditConfig same = make_edit_config(cfg, 1.0, plan.size(), it.condition, it.condition);
        collapse[i] = max_abs_diff(edit_run(rec, same, *ex.predictor, ex.schedule).edited, recon.z0);

        for (std::size_t ty = 0; ty < n_types; ++ty) {
            const EditType type = cfg.edit.types[ty];
            const Condition target = target_condition(cfg, it, type);
            const EditConfig ec = make_edit_config(cfg, cfg.dcs.eta, plan.size(), it.condition, target);
            EditItemResult& r = edits[i * n_types + ty];
            r.item = i;
            r.type = type;
            r.source_label = it.label;
            r.target_label = cfg.edit.target ? *cfg.edit.target : (it.label + 1) % it.condition.dim();
            r.result = edit_run(rec, ec, *ex.predictor, ex.schedule);
            r.recon_mse = recon_mse;
            r.edit_scores = score(it.latent, r.result.edited, ex.peak);
            r.modes_ok = check_mode_schedule(r.result.log, ec);
            for (std::size_t e = 0; e < n_eta; ++e) {
                const EditConfig sweep_cfg =
                    make_edit_config(cfg, cfg.edit.eta_sweep[e], plan.size(), it.condition, target);
                eta_mse[(i * n_types + ty) * n_eta + e] =
                    mse(edit_run(rec, sweep_cfg, *ex.predictor, ex.schedule).edited, it.latent);
            }
        }
    });

    EditSuite suite;
    suite.edits = std::move(edits);
    suite.collapse_max_abs = std::move(collapse);
    for (std::size_t ty = 0; ty < n_types; ++ty) {
        for (std::size_t e = 0; e < n_eta; ++e) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n_items; ++i) acc += eta_mse[(i * n_types + ty) * n_eta + e];
            suite.eta_sweep.push_back(EtaRow{cfg.edit.types[ty], cfg.edit.eta_sweep[e], acc / static_cast<double>(n_items)});
        }
    }
    return suite;
}

int cmd_edit(const ExperimentConfig& cfg) {
    const Experiment ex = make_experiment(cfg);
    const EditSuite suite = run_edit(ex);
    const fs::path tensors = cfg.out_dir / "edit";
    fs::create_directories(tensors);
    auto log = open_csv(cfg.out_dir, "edit_log.csv", "item,type,plan_index,t,mode,omega,m,n,mse_to_aux");
    auto metrics = open_csv(cfg.out_dir, "edit_metrics.csv",
                            "item,type,source,target,recon_mse,edit_mse,edit_psnr,edit_ssim");
    bool ok = true;
    for (const auto& r : suite.edits) {
        char name[64];
        std::snprintf(name, sizeof name, "item_%04zu_%s.erdt", r.item, to_string(r.type));
        write_tensor(tensors / name, r.result.edited);
        for (const auto& e : r.result.log) {
            log << r.item << ',' << to_string(r.type) << ',' << e.plan_index << ',' << e.timestep << ','
                << to_string(e.mode) << ',' << format_double(e.omega) << ',' << format_double(e.m) << ','
                << format_double(e.n) << ',' << format_double(e.mse_to_aux) << '\n';
        }
        metrics << r.item << ',' << to_string(r.type) << ',' << r.source_label << ',' << r.target_label << ','
                << format_double(r.recon_mse) << ',' << format_double(r.edit_scores.mse) << ','
                << format_double(r.edit_scores.psnr) << ',' << format_optional(r.edit_scores.ssim) << '\n';
        if (!r.modes_ok) {
            std::cerr << "edit: mode schedule mismatch for item " << r.item << ' ' << to_string(r.type) << '\n';
            ok = false;
        }
    }
    auto eta = open_csv(cfg.out_dir, "edit_eta.csv", "type,eta,mean_mse_to_original");
    for (const auto& row : suite.eta_sweep) {
        eta << to_string(row.type) << ',' << format_double(row.eta) << ','
            << format_double(row.mean_mse_to_original) << '\n';
    }
    auto collapse = open_csv(cfg.out_dir, "edit_collapse.csv", "item,max_abs_vs_joint_infer");
    for (std::size_t i = 0; i < suite.collapse_max_abs.size(); ++i) {
        collapse << i << ',' << format_double(suite.collapse_max_abs[i]) << '\n';
        if (!(suite.collapse_max_abs[i] <= 1e-6)) {
            std::cerr << "edit: collapse case differs from joint inference for item " << i << '\n';
            ok = false;
        }
    }
    return ok ? kExitOk : kExitAssertion;
}

// ---- bench ----

std::vector<BenchRow> run_bench(const Experiment& ex) {
    std::vector<BenchRow> rows;
    for (int steps : ex.cfg.plan.sweep) {
        const TimestepPlan plan = make_plan(ex.schedule.train_steps(), steps);
        for (double omega : ex.cfg.dcs.omega_sweep) {
            BenchRow row{steps, omega};
            for (std::size_t i = 0; i < ex.items.size(); ++i) {
                const Item& it = ex.items[i];
                const ReconReport r =
                    reconstruct(it.latent, *ex.predictor, it.condition, omega, plan, ex.schedule, ex.peak);
                if (i == 0) {
                    row.ddim_inversion = r.ddim.inversion_calls;
                    row.ddim_inference = r.ddim.inference_calls;
                    row.erddci_inversion = r.erddci.inversion_calls;
                    row.erddci_inference = r.erddci.inference_calls;
                } else if (row.ddim_inversion != r.ddim.inversion_calls ||
                           row.erddci_inversion != r.erddci.inversion_calls ||
                           row.ddim_inference != r.ddim.inference_calls ||
                           row.erddci_inference != r.erddci.inference_calls) {
                    throw IntegrityError("predictor call counts differ between items");
                }
                row.ddim_ms += r.ddim.wall_ms;
                row.erddci_ms += r.erddci.wall_ms;
            }
            const double n = static_cast<double>(ex.items.size());
            row.ddim_ms /= n;
            row.erddci_ms /= n;
            const std::uint64_t per_eval = omega == 1.0 ? 1 : 2;
            const std::uint64_t un = static_cast<std::uint64_t>(steps);
            row.inversion_ratio_ok = row.ddim_inversion == un * per_eval && row.erddci_inversion == 2 * row.ddim_inversion;
            row.total_ok = row.erddci_inference == 0 &&
                           row.erddci_inversion + row.erddci_inference == row.ddim_inversion + row.ddim_inference;
            rows.push_back(row);
        }
    }
    return rows;
}

int cmd_bench(const ExperimentConfig& cfg) {
    const Experiment ex = make_experiment(cfg);
    const std::vector<BenchRow> rows = run_bench(ex);
    auto counts = open_csv(cfg.out_dir, "bench_counts.csv",
                           "steps,omega,ddim_inversion_calls,ddim_inference_calls,ddim_total,erddci_inversion_calls,"
                           "erddci_inference_calls,erddci_total,inversion_ratio_ok,total_ok");
    auto timing = open_csv(cfg.out_dir, "bench_timing.csv", "steps,omega,ddim_ms,erddci_ms,ratio");
    bool ok = true;
    for (const auto& r : rows) {
        counts << r.steps << ',' << format_double(r.omega) << ',' << r.ddim_inversion << ',' << r.ddim_inference
               << ',' << r.ddim_inversion + r.ddim_inference << ',' << r.erddci_inversion << ','
               << r.erddci_inference << ',' << r.erddci_inversion + r.erddci_inference << ','
               << (r.inversion_ratio_ok ? 1 : 0) << ',' << (r.total_ok ? 1 : 0) << '\n';
        timing << r.steps << ',' << format_double(r.omega) << ',' << format_double(r.ddim_ms) << ','
               << format_double(r.erddci_ms) << ',' << format_double(r.ddim_ms > 0 ? r.erddci_ms / r.ddim_ms : 0.0)
               << '\n';
        if (!r.inversion_ratio_ok || !r.total_ok) {
            std::cerr << "bench: call-count check failed at steps=" << r.steps << " omega=" << r.omega << '\n';
            ok = false;
        }
    }
    return ok ? kExitOk : kExitAssertion;
}

// ---- traj ----

TrajSuite run_traj(const Experiment& ex) {
    const auto& cfg = ex.cfg;
    if (cfg.traj.item >= ex.items.size()) throw ConfigError("traj.item is outside the dataset");
    const Item& it = ex.items[cfg.traj.item];
    const TimestepPlan plan = make_plan(ex.schedule.train_steps(), cfg.plan.n_steps);
    const InversionRecord rec = dci_invert(it.latent, *ex.predictor, it.condition, 1.0, plan, ex.schedule);

    TrajSuite suite;
    Trajectory origin(Direction::inference);
    origin.push(0, it.latent);
    suite.trajectories.push_back({"z0", origin});
    suite.trajectories.push_back({"JIT", joint_infer(rec, ex.schedule).trajectory});
    const Tensor& start = cfg.traj.dit_from_aux ? rec.aux_last() : rec.ddim_last();
    const double dit_omega = cfg.traj.dit_omega.value_or(cfg.dcs.omega);
    suite.trajectories.push_back(
        {"DIT", ddim_infer(start, *ex.predictor, it.condition, dit_omega, plan, ex.schedule)});
    for (EditType type : cfg.edit.types) {
        const EditConfig ec =
            make_edit_config(cfg, cfg.dcs.eta, plan.size(), it.condition, target_condition(cfg, it, type));
        suite.trajectories.push_back({to_string(type), edit_run(rec, ec, *ex.predictor, ex.schedule).trajectory});
    }

    suite.projection = pca_project(suite.trajectories, 2);
    const auto& jit_end = suite.projection.coords[1].back();
    const auto& z0_proj = suite.projection.coords[0].front();
    double gap = 0.0;
    for (std::size_t c = 0; c < jit_end.size(); ++c) gap = std::max(gap, std::abs(jit_end[c] - z0_proj[c]));
    suite.jit_endpoint_gap = gap;

    const Trajectory& jit = suite.trajectories[1].trajectory;
    std::vector<double> elapsed(jit.size());
    for (std::size_t s = 0; s < elapsed.size(); ++s) elapsed[s] = static_cast<double>(s);
    for (std::size_t j = 2; j < suite.trajectories.size(); ++j) {
        suite.distance_names.push_back(suite.trajectories[j].name);
        suite.distances.push_back(distance_series(suite.trajectories[j].trajectory, jit));
        suite.spearman.push_back(spearman(suite.distances.back(), elapsed));
    }
    return suite;
}

int cmd_traj(const ExperimentConfig& cfg) {
    const Experiment ex = make_experiment(cfg);
    const TrajSuite suite = run_traj(ex);
    auto proj = open_csv(cfg.out_dir, "traj_projection.csv", "trajectory,step,timestep,pc1,pc2");
    for (std::size_t j = 0; j < suite.trajectories.size(); ++j) {
        const auto& traj = suite.trajectories[j].trajectory;
        for (std::size_t s = 0; s < traj.size(); ++s) {
            const auto& c = suite.projection.coords[j][s];
            proj << suite.trajectories[j].name << ',' << s << ',' << traj[s].timestep << ','
                 << format_double(c.size() > 0 ? c[0] : 0.0) << ',' << format_double(c.size() > 1 ? c[1] : 0.0)
                 << '\n';
        }
    }
    std::string header = "step,timestep";
    for (const auto& n : suite.distance_names) header += "," + n;
    auto dist = open_csv(cfg.out_dir, "traj_distance.csv", header);
    const Trajectory& jit = suite.trajectories[1].trajectory;
    for (std::size_t s = 0; s < jit.size(); ++s) {
        dist << s << ',' << jit[s].timestep;
        for (const auto& d : suite.distances) dist << ',' << format_double(d[s]);
        dist << '\n';
    }
    auto summary = open_csv(cfg.out_dir, "traj_summary.csv", "trajectory,d_initial,d_final,mean_distance,spearman");
    for (std::size_t j = 0; j < suite.distances.size(); ++j) {
        const auto& d = suite.distances[j];
        double mean = 0.0;
        for (double v : d) mean += v;
        mean /= static_cast<double>(d.size());
        summary << suite.distance_names[j] << ',' << format_double(d.front()) << ',' << format_double(d.back())
                << ',' << format_double(mean) << ',' << format_double(suite.spearman[j]) << '\n';
    }
    if (!(suite.jit_endpoint_gap <= 1e-6)) {
        std::cerr << "traj: JIT endpoint is " << suite.jit_endpoint_gap << " away from z0 in projection\n";
        return kExitAssertion;
    }
    return kExitOk;
}

}  // namespace erddci::harness
