// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "erddci/gmm.hpp"
#include "erddci/predictor.hpp"
#include "erddci/rng.hpp"
#include "erddci/schedule.hpp"

namespace erddci {

struct MlpConfig {
    std::size_t latent_dim = 0;
    std::size_t hidden = 64;
    std::size_t condition_dim = 1;
    std::size_t time_frequencies = 8;
    int train_steps = 1000;  ///< T_train, used to normalize t before embedding

    std::size_t input_dim() const noexcept { return latent_dim + 2 * time_frequencies + condition_dim; }
    std::size_t parameter_count() const noexcept {
        return hidden * input_dim() + hidden + latent_dim * hidden + latent_dim;
    }
    void validate() const;
};

/// Sinusoidal embedding of s = t / T: sin(2^f s), cos(2^f s) for f < F.
std::vector<double> time_embedding(int t, int train_steps, std::size_t frequencies);

/// One training pair for the noise-prediction loss.
struct TrainingSample {
    Tensor noisy;  ///< z_t
    Condition condition;
    int t = 1;
    Tensor noise;  ///< the eps that produced z_t
};

/// eps_theta(z, c, t) = W2 tanh(W1 [z; emb(t); c] + b1) + b2.
///
/// The query z may have any shape with latent_dim elements; the output has
/// z's shape. Parameters are laid out flat as W1 (hidden x input, row-major),
/// b1, W2 (latent x hidden, row-major), b2.
class MlpPredictor final : public Predictor {
public:
    /// All parameters zero.
    explicit MlpPredictor(MlpConfig config);

    /// W ~ N(0, 1 / fan_in), biases zero.
    static MlpPredictor initialized(MlpConfig config, Rng& rng);

    MlpPredictor(const MlpPredictor& other);
    MlpPredictor& operator=(const MlpPredictor&) = delete;

    std::size_t condition_dim() const noexcept override { return config_.condition_dim; }
    const MlpConfig& config() const noexcept { return config_; }

    std::span<const double> parameters() const noexcept { return params_; }
    void set_parameters(std::span<const double> values);

    /// Mean over the batch of the per-element squared error ||eps - out||^2 / D.
    double loss(std::span<const TrainingSample> batch) const;

    /// Loss and its gradient with respect to parameters(), by backpropagation.
    double loss_and_gradient(std::span<const TrainingSample> batch, std::vector<double>& grad) const;

    /// Layer tensors: w1 [hidden, input], b1 [hidden], w2 [latent, hidden], b2 [latent].
    Tensor w1() const;
    Tensor b1() const;
    Tensor w2() const;
    Tensor b2() const;

protected:
    Tensor evaluate(const Tensor& z, const Condition& c, int t) const override;

private:
    double accumulate(std::span<const TrainingSample> batch, std::vector<double>* grad) const;
    void forward(const Tensor& z, const Condition& c, int t, std::vector<double>& input,
                 std::vector<double>& hidden, std::vector<double>& out) const;

    std::size_t w1_offset() const noexcept { return 0; }
    std::size_t b1_offset() const noexcept { return config_.hidden * config_.input_dim(); }
    std::size_t w2_offset() const noexcept { return b1_offset() + config_.hidden; }
    std::size_t b2_offset() const noexcept { return w2_offset() + config_.latent_dim * config_.hidden; }

    MlpConfig config_;
    std::vector<double> params_;
};

struct TrainOptions {
    int epochs = 50;
    int steps_per_epoch = 50;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    /// Probability of training a sample with the null condition, so the model
    /// also learns the unconditional branch used by guidance.
    double condition_dropout = 0.1;
    /// Scale the step size by (1 + cos(pi * progress)) / 2 over the run.
    bool cosine_decay = false;
};

struct TrainResult {
    std::vector<double> epoch_loss;  ///< mean training loss per epoch
};

/// Draws a clean latent and its condition.
using CleanSampler = std::function<std::pair<Tensor, Condition>(Rng&)>;

CleanSampler sampler_from_model(const GmmDataModel& model);
CleanSampler sampler_from_dataset(std::vector<Tensor> latents, std::vector<Condition> conditions);

/// Builds a noisy training pair: t uniform on [1, T], eps ~ N(0, I),
/// z_t = sqrt(alpha_bar) z0 + sqrt(1 - alpha_bar) eps.
TrainingSample make_training_sample(const CleanSampler& data, const NoiseSchedule& schedule, Rng& rng,
                                    double condition_dropout);

/// Minimizes the noise-prediction loss with minibatch Adam. `on_epoch`
/// (optional) is invoked after each epoch with the epoch index and model.
/// Throws TrainingError if the loss becomes non-finite.
TrainResult mlp_train(MlpPredictor& model, const CleanSampler& data, const NoiseSchedule& schedule, Rng& rng,
                      const TrainOptions& options,
                      const std::function<void(int, const MlpPredictor&)>& on_epoch = {});

/// Checkpoint = directory with w1/b1/w2/b2 tensor files and manifest.txt.
void save_checkpoint(const std::filesystem::path& dir, const MlpPredictor& model);
MlpPredictor load_checkpoint(const std::filesystem::path& dir);

}  // namespace erddci
