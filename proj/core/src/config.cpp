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

#include "qklab/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <system_error>

#include "qklab/errors.hpp"
#include "qklab/statevector.hpp"

namespace qklab {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> items;
    std::string item;
    std::istringstream stream(value);
    while (std::getline(stream, item, ',')) {
        items.push_back(trim(item));
    }
    return items;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* expected) {
    throw ConfigError("key '" + key + "': expected " + expected + ", got '" +
                      value + "'");
}

long long parse_ll(const std::string& key, const std::string& token) {
    long long out = 0;
    const auto [ptr, ec] =
        std::from_chars(token.data(), token.data() + token.size(), out);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
        bad_value(key, token, "an integer");
    }
    return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& token) {
    std::uint64_t out = 0;
    const auto [ptr, ec] =
        std::from_chars(token.data(), token.data() + token.size(), out);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
        bad_value(key, token, "a non-negative integer");
    }
    return out;
}

double parse_double_token(const std::string& key, const std::string& token) {
    double out = 0.0;
    const auto [ptr, ec] =
        std::from_chars(token.data(), token.data() + token.size(), out);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
        bad_value(key, token, "a number");
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& token) {
    if (token == "true") {
        return true;
    }
    if (token == "false") {
        return false;
    }
    bad_value(key, token, "true or false");
}

/// Applies one parsed key to the config. Returns false for unknown keys.
bool apply_key(ExperimentConfig& config, const std::string& key,
               const std::string& value) {
    if (key == "experiment") {
        config.experiment = value;
    } else if (key == "dataset") {
        config.dataset = value;
    } else if (key == "synthetic_n") {
        config.synthetic_n = static_cast<int>(parse_ll(key, value));
    } else if (key == "synthetic_dim") {
        config.synthetic_dim = static_cast<int>(parse_ll(key, value));
    } else if (key == "synthetic_separation") {
        config.synthetic_separation = parse_double_token(key, value);
    } else if (key == "idx_images") {
        config.idx_images = value;
    } else if (key == "idx_labels") {
        config.idx_labels = value;
    } else if (key == "class_a") {
        config.class_a = static_cast<int>(parse_ll(key, value));
    } else if (key == "class_b") {
        config.class_b = static_cast<int>(parse_ll(key, value));
    } else if (key == "csv_path") {
        config.csv_path = value;
    } else if (key == "label_column") {
        config.label_column = value;
    } else if (key == "cache_path") {
        config.cache_path = value;
    } else if (key == "data_seed") {
        config.data_seed = parse_u64(key, value);
    } else if (key == "feature_map") {
        config.feature_map = value;
    } else if (key == "dimensions") {
        config.dimensions.clear();
        for (const auto& token : split_list(value)) {
            config.dimensions.push_back(static_cast<int>(parse_ll(key, token)));
        }
    } else if (key == "scalings") {
        config.scalings.clear();
        for (const auto& token : split_list(value)) {
            config.scalings.push_back(parse_double_token(key, token));
        }
    } else if (key == "trotter_steps") {
        config.trotter_steps = static_cast<int>(parse_ll(key, value));
    } else if (key == "haar_seeds") {
        config.haar_seeds.clear();
        for (const auto& token : split_list(value)) {
            config.haar_seeds.push_back(parse_u64(key, token));
        }
    } else if (key == "c_selection") {
        config.c_selection = value;
    } else if (key == "cv_folds") {
        config.cv_folds = static_cast<int>(parse_ll(key, value));
    } else if (key == "c_grid") {
        config.c_grid.clear();
        for (const auto& token : split_list(value)) {
            config.c_grid.push_back(parse_double_token(key, token));
        }
    } else if (key == "n_train") {
        config.n_train = static_cast<int>(parse_ll(key, value));
    } else if (key == "n_test") {
        config.n_test = static_cast<int>(parse_ll(key, value));
    } else if (key == "restandardize") {
        config.restandardize = parse_bool(key, value);
    } else if (key == "pca_on_pool") {
        config.pca_on_pool = parse_bool(key, value);
    } else if (key == "noise_shots") {
        config.noise_shots = static_cast<int>(parse_ll(key, value));
    } else if (key == "noise_probe") {
        config.noise_probe = static_cast<int>(parse_ll(key, value));
    } else if (key == "noise_repeats") {
        config.noise_repeats = static_cast<int>(parse_ll(key, value));
    } else if (key == "noise_random_probe") {
        config.noise_random_probe = parse_bool(key, value);
    } else if (key == "decimals") {
        config.decimals.clear();
        for (const auto& token : split_list(value)) {
            if (token == "full") {
                config.decimals.push_back(-1);
            } else {
                config.decimals.push_back(
                    static_cast<int>(parse_ll(key, token)));
            }
        }
    } else if (key == "out_dir") {
        config.out_dir = value;
    } else if (key == "threads") {
        config.threads = static_cast<int>(parse_ll(key, value));
    } else if (key == "master_seed") {
        config.master_seed = parse_u64(key, value);
    } else if (key == "max_qubits") {
        config.max_qubits = static_cast<int>(parse_ll(key, value));
    } else if (key == "budget_seconds") {
        config.budget_seconds = parse_double_token(key, value);
    } else if (key == "save_grams") {
        config.save_grams = parse_bool(key, value);
    } else {
        return false;
    }
    return true;
}

template <typename T>
std::string join_list(const std::vector<T>& items,
                      std::string (*format)(T)) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += format(items[i]);
    }
    return out;
}

std::string format_int(int v) { return std::to_string(v); }
std::string format_u64(std::uint64_t v) { return std::to_string(v); }
std::string format_decimals(int v) {
    return v == -1 ? std::string("full") : std::to_string(v);
}
std::string format_double_item(double v) { return format_double(v); }

} // namespace

std::string format_double(double value) {
    char buffer[64];
    const auto [ptr, ec] =
        std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (ec != std::errc()) {
        throw NumericError("format_double: conversion failed");
    }
    return std::string(buffer, ptr);
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig config;
    std::istringstream stream(text);
    std::string line;
    std::size_t line_no = 0;
    std::set<std::string> seen;
    while (std::getline(stream, line)) {
        ++line_no;
        const auto comment = line.find('#');
        if (comment != std::string::npos) {
            line = line.substr(0, comment);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) +
                              ": expected 'key = value', got '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("line " + std::to_string(line_no) +
                              ": empty key");
        }
        if (!seen.insert(key).second) {
            throw ConfigError("line " + std::to_string(line_no) +
                              ": duplicate key '" + key + "'");
        }
        if (!apply_key(config, key, value)) {
            throw ConfigError("line " + std::to_string(line_no) +
                              ": unknown key '" + key + "'");
        }
    }
    return config;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

void validate_config(const ExperimentConfig& config) {
    const std::set<std::string> experiments{"bandwidth-sweep", "qubit-sweep",
                                            "noise-study", "precision-study"};
    if (experiments.find(config.experiment) == experiments.end()) {
        throw ConfigError("experiment must be one of bandwidth-sweep, "
                          "qubit-sweep, noise-study, precision-study; got '" +
                          config.experiment + "'");
    }
    if (config.dataset == "synthetic") {
        if (config.synthetic_n < 4 || config.synthetic_n % 2 != 0) {
            throw ConfigError("synthetic_n must be even and at least 4");
        }
        if (config.synthetic_dim < 1) {
            throw ConfigError("synthetic_dim must be at least 1");
        }
        if (config.n_train + config.n_test > config.synthetic_n) {
            throw ConfigError("n_train + n_test exceeds synthetic_n");
        }
        for (const int d : config.dimensions) {
            if (d > config.synthetic_dim) {
                throw ConfigError("dimension " + std::to_string(d) +
                                  " exceeds synthetic_dim " +
                                  std::to_string(config.synthetic_dim));
            }
        }
    } else if (config.dataset == "idx") {
        if (config.idx_images.empty() || config.idx_labels.empty()) {
            throw ConfigError("idx dataset needs idx_images and idx_labels");
        }
        if (config.class_a == config.class_b) {
            throw ConfigError("class_a and class_b must differ");
        }
    } else if (config.dataset == "csv") {
        if (config.csv_path.empty()) {
            throw ConfigError("csv dataset needs csv_path");
        }
        if (config.label_column.empty()) {
            throw ConfigError("csv dataset needs label_column");
        }
    } else if (config.dataset == "cache") {
        if (config.cache_path.empty()) {
            throw ConfigError("cache dataset needs cache_path");
        }
    } else {
        throw ConfigError("dataset must be synthetic, idx, csv, or cache; "
                          "got '" +
                          config.dataset + "'");
    }

    if (config.feature_map != "iqp" && config.feature_map != "hamevo" &&
        config.feature_map != "rbf") {
        throw ConfigError("feature_map must be iqp, hamevo, or rbf; got '" +
                          config.feature_map + "'");
    }
    if (config.dimensions.empty()) {
        throw ConfigError("dimensions must be nonempty");
    }
    // Dimensions over the qubit cap are not config errors: the run keeps
    // the cells that fit and reports the rest as skipped-capacity rows,
    // so a wide sweep can be trimmed with max_qubits instead of edited.
    for (const int d : config.dimensions) {
        if (d < 1) {
            throw ConfigError("dimensions must be positive");
        }
    }
    if (config.scalings.empty()) {
        throw ConfigError("scalings must be nonempty");
    }
    for (const double s : config.scalings) {
        if (!(s > 0.0)) {
            throw ConfigError("scalings must be positive");
        }
    }
    if (config.haar_seeds.empty()) {
        throw ConfigError("haar_seeds must be nonempty");
    }
    if (config.trotter_steps < 1) {
        throw ConfigError("trotter_steps must be at least 1");
    }
    if (config.c_selection != "cv" && config.c_selection != "train-score") {
        throw ConfigError("c_selection must be cv or train-score; got '" +
                          config.c_selection + "'");
    }
    if (config.cv_folds < 2) {
        throw ConfigError("cv_folds must be at least 2");
    }
    for (std::size_t i = 0; i < config.c_grid.size(); ++i) {
        if (!(config.c_grid[i] > 0.0)) {
            throw ConfigError("c_grid values must be positive");
        }
        if (i > 0 && config.c_grid[i] <= config.c_grid[i - 1]) {
            throw ConfigError("c_grid must be strictly increasing");
        }
    }
    if (config.n_train < 2 || config.n_test < 1) {
        throw ConfigError("need n_train >= 2 and n_test >= 1");
    }
    if (config.noise_shots < 1 || config.noise_probe < 2 ||
        config.noise_repeats < 2) {
        throw ConfigError("need noise_shots >= 1, noise_probe >= 2, "
                          "noise_repeats >= 2");
    }
    if (config.noise_probe > config.n_train) {
        throw ConfigError("noise_probe exceeds n_train");
    }
    if (config.decimals.empty()) {
        throw ConfigError("decimals must be nonempty");
    }
    for (const int d : config.decimals) {
        if (d != -1 && d < 1) {
            throw ConfigError("decimals entries must be 'full' or >= 1");
        }
    }
    if (config.out_dir.empty()) {
        throw ConfigError("out_dir must be nonempty");
    }
    if (config.threads < 1) {
        throw ConfigError("threads must be at least 1");
    }
    if (config.max_qubits < 1 ||
        config.max_qubits > kDefaultMaxQubits + 4) {
        throw ConfigError("max_qubits must be in [1, " +
                          std::to_string(kDefaultMaxQubits + 4) + "]");
    }
    if (config.budget_seconds < 0.0) {
        throw ConfigError("budget_seconds must be non-negative");
    }
}

std::vector<std::pair<std::string, std::string>> config_key_values(
    const ExperimentConfig& config) {
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("experiment", config.experiment);
    kv.emplace_back("dataset", config.dataset);
    if (config.dataset == "synthetic") {
        kv.emplace_back("synthetic_n", std::to_string(config.synthetic_n));
        kv.emplace_back("synthetic_dim", std::to_string(config.synthetic_dim));
        kv.emplace_back("synthetic_separation",
                        format_double(config.synthetic_separation));
    } else if (config.dataset == "idx") {
        kv.emplace_back("idx_images", config.idx_images);
        kv.emplace_back("idx_labels", config.idx_labels);
        kv.emplace_back("class_a", std::to_string(config.class_a));
        kv.emplace_back("class_b", std::to_string(config.class_b));
    } else if (config.dataset == "csv") {
        kv.emplace_back("csv_path", config.csv_path);
        kv.emplace_back("label_column", config.label_column);
    } else if (config.dataset == "cache") {
        kv.emplace_back("cache_path", config.cache_path);
    }
    kv.emplace_back("data_seed", std::to_string(config.data_seed));
    kv.emplace_back("feature_map", config.feature_map);
    kv.emplace_back("dimensions", join_list(config.dimensions, format_int));
    kv.emplace_back("scalings", join_list(config.scalings, format_double_item));
    kv.emplace_back("trotter_steps", std::to_string(config.trotter_steps));
    kv.emplace_back("haar_seeds", join_list(config.haar_seeds, format_u64));
    kv.emplace_back("c_selection", config.c_selection);
    kv.emplace_back("cv_folds", std::to_string(config.cv_folds));
    if (!config.c_grid.empty()) {
        kv.emplace_back("c_grid", join_list(config.c_grid, format_double_item));
    }
    kv.emplace_back("n_train", std::to_string(config.n_train));
    kv.emplace_back("n_test", std::to_string(config.n_test));
    kv.emplace_back("restandardize",
                    config.restandardize ? "true" : "false");
    kv.emplace_back("pca_on_pool", config.pca_on_pool ? "true" : "false");
    kv.emplace_back("noise_shots", std::to_string(config.noise_shots));
    kv.emplace_back("noise_probe", std::to_string(config.noise_probe));
    kv.emplace_back("noise_repeats", std::to_string(config.noise_repeats));
    kv.emplace_back("noise_random_probe",
                    config.noise_random_probe ? "true" : "false");
    kv.emplace_back("decimals", join_list(config.decimals, format_decimals));
    kv.emplace_back("out_dir", config.out_dir);
    kv.emplace_back("threads", std::to_string(config.threads));
    kv.emplace_back("master_seed", std::to_string(config.master_seed));
    kv.emplace_back("max_qubits", std::to_string(config.max_qubits));
    kv.emplace_back("budget_seconds", format_double(config.budget_seconds));
    kv.emplace_back("save_grams", config.save_grams ? "true" : "false");
    return kv;
}

std::string config_to_text(const ExperimentConfig& config) {
    std::string out;
    for (const auto& [key, value] : config_key_values(config)) {
        out += key;
        out += " = ";
        out += value;
        out += '\n';
    }
    return out;
}

} // namespace qklab
