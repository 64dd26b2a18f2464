// SPDX-License-Identifier: Apache-2.0
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "erddci/errors.hpp"
#include "erddci/harness/commands.hpp"
#include "erddci/harness/config.hpp"

namespace h = erddci::harness;

int main(int argc, char** argv) {
    CLI::App app{"Dual-chain inversion and guided editing on synthetic latents"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;

    const std::pair<const char*, const char*> commands[] = {
        {"train", "train the MLP noise predictor and write a checkpoint"},
        {"reconstruct", "round-trip reconstruction sweep"},
        {"edit", "condition edits with the dynamic control schedule"},
        {"bench", "predictor-call counts and timing"},
        {"traj", "trajectory projections and distances"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "configuration file")->required();
        sub->add_option("--seed", seed, "overrides data.seed");
        sub->add_option("--out", out_dir, "output directory (overrides out.directory)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? h::kExitOk : h::kExitConfig;
    }

    try {
        h::ExperimentConfig cfg = h::load_config(config_path);
        if (seed) cfg.data.seed = *seed;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        const std::string name = app.get_subcommands().front()->get_name();
        if (name == "train") return h::cmd_train(cfg);
        if (name == "reconstruct") return h::cmd_reconstruct(cfg);
        if (name == "edit") return h::cmd_edit(cfg);
        if (name == "bench") return h::cmd_bench(cfg);
        return h::cmd_traj(cfg);
    } catch (const erddci::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return h::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return h::kExitRuntime;
    }
}
