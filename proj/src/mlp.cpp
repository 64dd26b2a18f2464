// SPDX-License-Identifier: Apache-2.0
#include "erddci/mlp.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

#include "erddci/errors.hpp"
#include "erddci/tensor_file.hpp"

namespace erddci {

void MlpConfig::validate() const {
    if (latent_dim == 0 || hidden == 0) throw ParameterError("MLP latent and hidden sizes must be positive");
    if (condition_dim == 0) throw ParameterError("MLP condition dimension must be positive");
    if (time_frequencies == 0 || time_frequencies > 30) throw ParameterError("time frequencies must be in [1, 30]");
    if (train_steps < 1) throw ParameterError("MLP train_steps must be positive");
}

std::vector<double> time_embedding(int t, int train_steps, std::size_t frequencies) {
    const double s = static_cast<double>(t) / static_cast<double>(train_steps);
    std::vector<double> out(2 * frequencies);
    for (std::size_t f = 0; f < frequencies; ++f) {
        const double angle = std::ldexp(s, static_cast<int>(f));
        out[2 * f] = std::sin(angle);
        out[2 * f + 1] = std::cos(angle);
    }
    return out;
}

MlpPredictor::MlpPredictor(MlpConfig config) : config_(config) {
    config_.validate();
    params_.assign(config_.parameter_count(), 0.0);
}

MlpPredictor::MlpPredictor(const MlpPredictor& other)
    : Predictor(), config_(other.config_), params_(other.params_) {}

MlpPredictor MlpPredictor::initialized(MlpConfig config, Rng& rng) {
    MlpPredictor model(config);
    const auto& c = model.config_;
    const double s1 = 1.0 / std::sqrt(static_cast<double>(c.input_dim()));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(c.hidden));
    for (std::size_t i = 0; i < c.hidden * c.input_dim(); ++i) model.params_[model.w1_offset() + i] = s1 * rng.normal();
    for (std::size_t i = 0; i < c.latent_dim * c.hidden; ++i) model.params_[model.w2_offset() + i] = s2 * rng.normal();
    return model;
}

void MlpPredictor::set_parameters(std::span<const double> values) {
    if (values.size() != params_.size()) throw ShapeError("parameter vector has the wrong length");
    require_finite(values, "MLP parameters");
    params_.assign(values.begin(), values.end());
}

Tensor MlpPredictor::w1() const {
    const auto first = params_.begin() + static_cast<std::ptrdiff_t>(w1_offset());
    return Tensor({config_.hidden, config_.input_dim()},
                  std::vector<double>(first, first + static_cast<std::ptrdiff_t>(config_.hidden * config_.input_dim())));
}

Tensor MlpPredictor::b1() const {
    const auto first = params_.begin() + static_cast<std::ptrdiff_t>(b1_offset());
    return Tensor({config_.hidden}, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(config_.hidden)));
}

Tensor MlpPredictor::w2() const {
    const auto first = params_.begin() + static_cast<std::ptrdiff_t>(w2_offset());
    return Tensor({config_.latent_dim, config_.hidden},
                  std::vector<double>(first, first + static_cast<std::ptrdiff_t>(config_.latent_dim * config_.hidden)));
}

Tensor MlpPredictor::b2() const {
    const auto first = params_.begin() + static_cast<std::ptrdiff_t>(b2_offset());
    return Tensor({config_.latent_dim}, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(config_.latent_dim)));
}

void MlpPredictor::forward(const Tensor& z, const Condition& c, int t, std::vector<double>& input,
                           std::vector<double>& hidden, std::vector<double>& out) const {
    const auto& cfg = config_;
    if (z.size() != cfg.latent_dim) {
        throw ParameterError("MLP expects " + std::to_string(cfg.latent_dim) + " latent values, got " +
                             std::to_string(z.size()));
    }
    if (c.dim() != cfg.condition_dim) throw ParameterError("MLP condition dimension mismatch");
    if (t < 0 || t > cfg.train_steps) throw ParameterError("MLP timestep out of range");

    input.resize(cfg.input_dim());
    std::copy(z.values().begin(), z.values().end(), input.begin());
    const auto emb = time_embedding(t, cfg.train_steps, cfg.time_frequencies);
    std::copy(emb.begin(), emb.end(), input.begin() + static_cast<std::ptrdiff_t>(cfg.latent_dim));
    std::copy(c.values().begin(), c.values().end(),
              input.begin() + static_cast<std::ptrdiff_t>(cfg.latent_dim + emb.size()));

    const double* w1 = params_.data() + w1_offset();
    const double* b1 = params_.data() + b1_offset();
    const double* w2 = params_.data() + w2_offset();
    const double* b2 = params_.data() + b2_offset();
    const std::size_t in = cfg.input_dim();

    hidden.resize(cfg.hidden);
    for (std::size_t h = 0; h < cfg.hidden; ++h) {
        double a = b1[h];
        for (std::size_t i = 0; i < in; ++i) a += w1[h * in + i] * input[i];
        hidden[h] = std::tanh(a);
    }
    out.resize(cfg.latent_dim);
    for (std::size_t o = 0; o < cfg.latent_dim; ++o) {
        double a = b2[o];
        for (std::size_t h = 0; h < cfg.hidden; ++h) a += w2[o * cfg.hidden + h] * hidden[h];
        out[o] = a;
    }
}

Tensor MlpPredictor::evaluate(const Tensor& z, const Condition& c, int t) const {
    std::vector<double> input, hidden, out;
    forward(z, c, t, input, hidden, out);
    return Tensor(z.shape(), std::move(out));
}

double MlpPredictor::loss(std::span<const TrainingSample> batch) const {
    return accumulate(batch, nullptr);
}

double MlpPredictor::loss_and_gradient(std::span<const TrainingSample> batch, std::vector<double>& grad) const {
    return accumulate(batch, &grad);
}

double MlpPredictor::accumulate(std::span<const TrainingSample> batch, std::vector<double>* grad) const {
    if (batch.empty()) throw ParameterError("empty training batch");
    const auto& cfg = config_;
    if (grad) grad->assign(params_.size(), 0.0);
    const std::size_t in = cfg.input_dim();
    const double scale = 1.0 / (static_cast<double>(batch.size()) * static_cast<double>(cfg.latent_dim));
    const double* w2 = params_.data() + w2_offset();

    std::vector<double> input, hidden, out, d_out(cfg.latent_dim), d_pre(cfg.hidden);
    double total = 0.0;
    for (const auto& sample : batch) {
        if (sample.noise.size() != cfg.latent_dim) throw ParameterError("training noise has the wrong size");
        forward(sample.noisy, sample.condition, sample.t, input, hidden, out);
        for (std::size_t o = 0; o < cfg.latent_dim; ++o) {
            const double r = out[o] - sample.noise[o];
            total += r * r;
            d_out[o] = 2.0 * r * scale;
        }
        if (!grad) continue;
        double* g_w1 = grad->data() + w1_offset();
        double* g_b1 = grad->data() + b1_offset();
        double* g_w2 = grad->data() + w2_offset();
        double* g_b2 = grad->data() + b2_offset();
        for (std::size_t h = 0; h < cfg.hidden; ++h) d_pre[h] = 0.0;
        for (std::size_t o = 0; o < cfg.latent_dim; ++o) {
            g_b2[o] += d_out[o];
            for (std::size_t h = 0; h < cfg.hidden; ++h) {
                g_w2[o * cfg.hidden + h] += d_out[o] * hidden[h];
                d_pre[h] += w2[o * cfg.hidden + h] * d_out[o];
            }
        }
        for (std::size_t h = 0; h < cfg.hidden; ++h) {
            const double dp = d_pre[h] * (1.0 - hidden[h] * hidden[h]);
            g_b1[h] += dp;
            for (std::size_t i = 0; i < in; ++i) g_w1[h * in + i] += dp * input[i];
        }
    }
    return total * scale;
}

CleanSampler sampler_from_model(const GmmDataModel& model) {
    model.validate();
    return [model](Rng& rng) {
        // Component drawn from the prior weights by inverse CDF.
        double u = 1.0 - rng.uniform();
        std::size_t pick = 0;
        for (; pick + 1 < model.components(); ++pick) {
            if (u < model.weights[pick]) break;
            u -= model.weights[pick];
        }
        return std::pair{model.sample_component(rng, pick), Condition::one_hot(model.components(), pick)};
    };
}

CleanSampler sampler_from_dataset(std::vector<Tensor> latents, std::vector<Condition> conditions) {
    if (latents.empty() || latents.size() != conditions.size()) {
        throw ParameterError("dataset needs one condition per latent and at least one item");
    }
    return [latents = std::move(latents), conditions = std::move(conditions)](Rng& rng) {
        const auto i = static_cast<std::size_t>(rng.below(latents.size()));
        return std::pair{latents[i], conditions[i]};
    };
}

TrainingSample make_training_sample(const CleanSampler& data, const NoiseSchedule& schedule, Rng& rng,
                                    double condition_dropout) {
    auto [z0, cond] = data(rng);
    const int t = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(schedule.train_steps())));
    if (rng.uniform() <= condition_dropout) cond = Condition::null(cond.dim());
    Tensor eps = sample_standard_normal(rng, z0.shape());
    const double ab = schedule.alpha_bar(t);
    Tensor noisy = lincomb(std::sqrt(ab), z0, std::sqrt(1.0 - ab), eps);
    return TrainingSample{std::move(noisy), std::move(cond), t, std::move(eps)};
}

TrainResult mlp_train(MlpPredictor& model, const CleanSampler& data, const NoiseSchedule& schedule, Rng& rng,
                      const TrainOptions& options, const std::function<void(int, const MlpPredictor&)>& on_epoch) {
    if (!(options.learning_rate > 0.0)) throw ParameterError("learning rate must be positive");
    if (options.epochs < 0 || options.steps_per_epoch < 1 || options.batch_size < 1) {
        throw ParameterError("invalid training loop sizes");
    }
    constexpr double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    std::vector<double> params(model.parameters().begin(), model.parameters().end());
    std::vector<double> m(params.size(), 0.0), v(params.size(), 0.0), grad;
    std::vector<TrainingSample> batch(options.batch_size);
    long step = 0;
    const long total_steps = static_cast<long>(options.epochs) * options.steps_per_epoch;

    TrainResult result;
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        double epoch_loss = 0.0;
        for (int s = 0; s < options.steps_per_epoch; ++s) {
            for (auto& sample : batch) sample = make_training_sample(data, schedule, rng, options.condition_dropout);
            const double loss = model.loss_and_gradient(batch, grad);
            if (!std::isfinite(loss)) {
                throw TrainingError("training diverged at epoch " + std::to_string(epoch) + ", step " +
                                    std::to_string(s) + " (learning rate " + std::to_string(options.learning_rate) +
                                    ")");
            }
            epoch_loss += loss;
            ++step;
            const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
            double lr = options.learning_rate;
            if (options.cosine_decay) {
                const double progress = static_cast<double>(step - 1) / static_cast<double>(total_steps);
                lr *= 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
            }
            for (std::size_t i = 0; i < params.size(); ++i) {
                m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
                v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
                params[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + adam_eps);
            }
            model.set_parameters(params);
        }
        result.epoch_loss.push_back(epoch_loss / options.steps_per_epoch);
        if (on_epoch) on_epoch(epoch, model);
    }
    return result;
}

void save_checkpoint(const std::filesystem::path& dir, const MlpPredictor& model) {
    std::filesystem::create_directories(dir);
    write_tensor(dir / "w1.erdt", model.w1());
    write_tensor(dir / "b1.erdt", model.b1());
    write_tensor(dir / "w2.erdt", model.w2());
    write_tensor(dir / "b2.erdt", model.b2());
    const auto& c = model.config();
    std::ofstream out(dir / "manifest.txt", std::ios::trunc);
    out << "format = erddci-mlp\n"
        << "version = 1\n"
        << "latent_dim = " << c.latent_dim << "\n"
        << "hidden = " << c.hidden << "\n"
        << "condition_dim = " << c.condition_dim << "\n"
        << "time_frequencies = " << c.time_frequencies << "\n"
        << "train_steps = " << c.train_steps << "\n"
        << "activation = tanh\n";
    if (!out) throw Error("cannot write checkpoint manifest in " + dir.string());
}

MlpPredictor load_checkpoint(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.txt");
    if (!in) throw Error("missing checkpoint manifest in " + dir.string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    if (kv["format"] != "erddci-mlp" || kv["version"] != "1") {
        throw Error("unsupported checkpoint manifest in " + dir.string());
    }
    auto get = [&](const char* key) -> std::size_t {
        auto it = kv.find(key);
        if (it == kv.end()) throw Error(std::string("checkpoint manifest lacks ") + key);
        return static_cast<std::size_t>(std::stoull(it->second));
    };
    MlpConfig cfg;
    cfg.latent_dim = get("latent_dim");
    cfg.hidden = get("hidden");
    cfg.condition_dim = get("condition_dim");
    cfg.time_frequencies = get("time_frequencies");
    cfg.train_steps = static_cast<int>(get("train_steps"));
    MlpPredictor model(cfg);

    std::vector<double> params;
    params.reserve(cfg.parameter_count());
    for (const char* name : {"w1.erdt", "b1.erdt", "w2.erdt", "b2.erdt"}) {
        const Tensor t = read_tensor(dir / name);
        params.insert(params.end(), t.values().begin(), t.values().end());
    }
    const Tensor w1 = read_tensor(dir / "w1.erdt");
    if (w1.shape() != Shape{cfg.hidden, cfg.input_dim()}) throw ShapeError("checkpoint w1 shape mismatch");
    model.set_parameters(params);
    return model;
}

}  // namespace erddci
