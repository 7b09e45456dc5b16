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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace qklab {

/// Full experiment description. Parsed from a flat key = value text file
/// (lists comma separated, '#' comments); every field has a default so a
/// resolved config always spells out the whole run.
struct ExperimentConfig {
    /// bandwidth-sweep | qubit-sweep | noise-study | precision-study.
    /// Usually injected by the CLI subcommand; a config file may state it
    /// as long as it does not contradict the subcommand.
    std::string experiment;

    /// synthetic | idx | csv | cache, with the matching keys below.
    std::string dataset = "synthetic";
    /// Sized so the default train/test split fits with room to spare.
    int synthetic_n = 1200;
    int synthetic_dim = 10;
    double synthetic_separation = 3.0;
    std::string idx_images;
    std::string idx_labels;
    int class_a = 0;
    int class_b = 3;
    std::string csv_path;
    std::string label_column = "label";
    std::string cache_path;
    /// Seeds pool generation and the train/test split.
    std::uint64_t data_seed = 1;

    /// iqp | hamevo | rbf. For rbf the scaling grid is read as absolute
    /// gamma values and n_qubits is reported as 0.
    std::string feature_map = "iqp";
    /// Feature dimensions after PCA; hamevo uses dim + 1 qubits.
    std::vector<int> dimensions{10};
    std::vector<double> scalings{1.0};
    int trotter_steps = 40;
    std::vector<std::uint64_t> haar_seeds{1, 2, 3, 4, 5};

    /// cv | train-score.
    std::string c_selection = "cv";
    int cv_folds = 5;
    std::vector<double> c_grid; // empty = solver default grid
    int n_train = 800;
    int n_test = 200;
    bool restandardize = true;
    bool pca_on_pool = true;

    int noise_shots = 5000;
    int noise_probe = 5;
    int noise_repeats = 10;
    bool noise_random_probe = false;

    /// Decimal places for the precision study; -1 means full precision
    /// and is written as "full" in config text.
    std::vector<int> decimals{1, 2, 3, 4, 6, -1};

    std::string out_dir = "out";
    int threads = 1;
    std::uint64_t master_seed = 0;
    int max_qubits = 26;
    /// Wall-clock guard in seconds; 0 disables it. When enabled, cells
    /// estimated past the deadline are skipped, which trades the
    /// byte-identical rerun guarantee for bounded runtime.
    double budget_seconds = 0.0;
    bool save_grams = false;
};

/// Parses flat key = value text. Unknown keys, bad types, and malformed
/// lines raise ConfigError naming the line.
ExperimentConfig parse_config_text(const std::string& text);

ExperimentConfig load_config_file(const std::filesystem::path& path);

/// Semantic validation (grids nonempty and positive, dataset keys
/// consistent, qubit counts within bounds, ...). Throws ConfigError.
void validate_config(const ExperimentConfig& config);

/// The fully-resolved config as ordered key/value pairs, defaults
/// expanded; only the keys of the active dataset kind appear. Feeding
/// the matching text back through parse_config_text reproduces the same
/// resolved pairs.
std::vector<std::pair<std::string, std::string>> config_key_values(
    const ExperimentConfig& config);

/// The resolved config as config-file text, one "key = value" per line.
std::string config_to_text(const ExperimentConfig& config);

/// Shortest decimal form that parses back to the same double. All config
/// and CSV output goes through this so reruns are byte-identical.
std::string format_double(double value);

} // namespace qklab
