// Copyright 2026 The qklab authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Experiment runner. Exit codes: 0 success, 2 config error, 3 partial
// run (some cells skipped), 4 runtime failure.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qklab/config.hpp"
#include "qklab/errors.hpp"
#include "qklab/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitPartial = 3;
constexpr int kExitRuntime = 4;

struct CliArgs {
    std::string config_path;
    std::string out_dir;
    int threads = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int max_qubits = 0;
};

void add_common_options(CLI::App* sub, CliArgs& args) {
    sub->add_option("--config", args.config_path,
                    "Path to the experiment config file")
        ->required();
    sub->add_option("--out", args.out_dir,
                    "Output directory (overrides out_dir in the config)");
    sub->add_option("--threads", args.threads,
                    "Worker threads (overrides threads in the config)");
    sub->add_option("--seed", args.seed,
                    "Master seed (overrides master_seed in the config)")
        ->each([&args](const std::string&) { args.seed_set = true; });
    sub->add_option("--max-qubits", args.max_qubits,
                    "Qubit cap (overrides max_qubits in the config)");
}

qklab::ExperimentConfig load_and_resolve(const CliArgs& args,
                                         const std::string& subcommand) {
    qklab::ExperimentConfig config =
        qklab::load_config_file(args.config_path);
    if (subcommand != "validate-config") {
        if (config.experiment.empty()) {
            config.experiment = subcommand;
        } else if (config.experiment != subcommand) {
            throw qklab::ConfigError("config names experiment '" +
                                     config.experiment +
                                     "' but the subcommand is '" +
                                     subcommand + "'");
        }
    } else if (config.experiment.empty()) {
        // Validation of a config meant to be paired with a run
        // subcommand later; check it against the default experiment.
        config.experiment = "bandwidth-sweep";
    }
    if (!args.out_dir.empty()) {
        config.out_dir = args.out_dir;
    }
    if (args.threads > 0) {
        config.threads = args.threads;
    }
    if (args.seed_set) {
        config.master_seed = args.seed;
    }
    if (args.max_qubits > 0) {
        config.max_qubits = args.max_qubits;
    }
    qklab::validate_config(config);
    return config;
}

int run_subcommand(const std::string& name, const CliArgs& args) {
    const qklab::ExperimentConfig config = load_and_resolve(args, name);
    if (name == "validate-config") {
        std::cout << qklab::config_to_text(config);
        return kExitOk;
    }
    qklab::RunReport report;
    if (name == "bandwidth-sweep") {
        report = qklab::run_bandwidth_sweep(config);
    } else if (name == "qubit-sweep") {
        report = qklab::run_qubit_sweep(config);
    } else if (name == "noise-study") {
        report = qklab::run_noise_study(config);
    } else {
        report = qklab::run_precision_study(config);
    }
    qklab::emit_outputs(report, config, config.out_dir);
    std::cout << "wrote " << config.out_dir << "/results.csv ("
              << report.rows.size() << " rows, " << report.n_skipped
              << " skipped)\n";
    return report.n_skipped > 0 ? kExitPartial : kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum-kernel classification experiments"};
    app.require_subcommand(1);
    CliArgs args;
    const char* subcommands[] = {"bandwidth-sweep", "qubit-sweep",
                                 "noise-study", "precision-study",
                                 "validate-config"};
    const char* descriptions[] = {
        "Accuracy versus bandwidth scaling factor",
        "Accuracy versus qubit count",
        "Exact versus finite-shot kernel accuracy",
        "Accuracy under rounded circuit angles",
        "Parse a config, apply overrides, and print it resolved"};
    for (std::size_t i = 0; i < std::size(subcommands); ++i) {
        add_common_options(app.add_subcommand(subcommands[i], descriptions[i]),
                           args);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        return run_subcommand(name, args);
    } catch (const qklab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
