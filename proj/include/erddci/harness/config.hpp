// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "erddci/errors.hpp"

namespace erddci::harness {

/// Configuration problem, carrying the 1-based line it refers to (0 when
/// the problem is not tied to one line).
class ConfigFileError : public ConfigError {
public:
    ConfigFileError(int line, const std::string& what)
        : ConfigError(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

/// Raw `key = value` entries grouped by `[section]`. Blank lines and lines
/// starting with '#' or ';' are ignored.
class KeyValueFile {
public:
    struct Entry {
        std::string value;
        int line = 0;
    };

    static KeyValueFile parse(const std::string& text);
    static KeyValueFile load(const std::filesystem::path& path);

    const Entry* find(const std::string& section, const std::string& key) const;

    /// Throws ConfigFileError on the first key not listed for its section.
    void reject_unknown(const std::map<std::string, std::vector<std::string>>& allowed) const;

private:
    std::map<std::string, std::map<std::string, Entry>> sections_;
};

struct ScheduleSettings {
    int train_steps = 1000;
    double beta_start = 1e-4;
    double beta_end = 0.02;
};

struct PlanSettings {
    int n_steps = 20;
    std::vector<int> sweep = {10, 20, 50};
};

enum class PredictorKind { constant, gmm, mlp };
enum class DataKind { gmm_samples, shapes32 };

struct PredictorSettings {
    PredictorKind kind = PredictorKind::gmm;
    double constant_value = 0.0;
    double condition_gain = 4.0;
    int fit_samples = 300;
    std::size_t hidden = 64;
    int epochs = 50;
    int steps_per_epoch = 40;
    std::size_t batch_size = 32;
    double learning_rate = 2e-3;
    double condition_dropout = 0.1;
    bool cosine_decay = true;
    std::uint64_t init_seed = 1;
    std::optional<std::filesystem::path> checkpoint;
};

struct DcsSettings {
    double omega = 3.0;
    std::vector<double> omega_sweep = {1.0, 2.0, 3.0};
    double eta = 0.6;
    int t_end = 0;
    double m = 0.5, n = 0.5;
    double strong_m = 0.8, strong_n = 0.2;
    int r = 3;
};

struct DataSettings {
    DataKind kind = DataKind::shapes32;
    std::uint64_t seed = 0;
    int count = 20;
    std::size_t side = 32;
    std::size_t dim = 4;
    std::size_t components = 3;
    double spread = 2.0;
    double variance = 0.05;
};

enum class EditType { t1, t2, t3 };

struct EditSettings {
    std::vector<EditType> types = {EditType::t1, EditType::t2, EditType::t3};
    std::optional<std::size_t> target;  ///< default: (source label + 1) mod K
    double mix = 0.5;
    double style_scale = 1.0;
    std::vector<double> eta_sweep = {0.2, 0.4, 0.6, 0.8};
    bool ji_uses_target = false;  ///< joint-inference steps under the target condition
};

struct TrajSettings {
    std::size_t item = 0;
    bool dit_from_aux = false;  ///< start the DDIM trajectory at the auxiliary end point
    std::optional<double> dit_omega;  ///< default: dcs omega
};

struct ExperimentConfig {
    ScheduleSettings schedule;
    PlanSettings plan;
    PredictorSettings predictor;
    DcsSettings dcs;
    DataSettings data;
    EditSettings edit;
    TrajSettings traj;
    std::filesystem::path out_dir = "out";
    std::filesystem::path base_dir = ".";
};

/// Parses and validates a configuration text. Relative paths resolve
/// against `base_dir`.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

const char* to_string(EditType type) noexcept;

}  // namespace erddci::harness
