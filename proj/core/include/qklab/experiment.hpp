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
#include <vector>

#include "qklab/config.hpp"
#include "qklab/data.hpp"

namespace qklab {

/// One experiment cell's outcome. Skipped cells keep their coordinates
/// and a status of skipped-capacity or skipped-budget with empty metrics.
struct ResultRow {
    std::string dataset;
    std::string feature_map;
    int n_qubits = 0;
    double scaling_factor = 0.0;
    /// Trotter sweeps; 0 for maps without a Trotter parameter.
    int trotter_steps = 0;
    std::uint64_t haar_seed = 0;
    double c_selected = 0.0;
    double train_bacc = 0.0;
    double test_bacc = 0.0;
    double median_offdiag = 0.0;
    double offdiag_std = 0.0;
    int n_support_vectors = 0;
    /// Injected noise level; 0 marks the exact path.
    double noise_sigma = 0.0;
    /// Decimal places of the circuit angles; -1 means full precision.
    int decimals = -1;
    /// ok | skipped-capacity | skipped-budget.
    std::string status = "ok";
    /// Wall-clock seconds for the cell. Written to timings.csv, never to
    /// results.csv, so reruns stay byte-identical.
    double wall_time_s = 0.0;
};

/// Fingerprints of the kernel matrices behind one cell.
struct GramChecksumRow {
    std::string cell;
    std::uint64_t train = 0;
    std::uint64_t cross = 0;
};

/// Everything a sweep produced, ordered by (qubits, scaling, seed,
/// decimals, noise) regardless of worker scheduling.
struct RunReport {
    std::vector<ResultRow> rows;
    std::vector<GramChecksumRow> checksums;
    int n_skipped = 0;
    /// FNV-1a fingerprint of the input dataset actually used.
    std::uint64_t input_checksum = 0;
};

/// Library version recorded in manifests.
const char* qklab_version();

/// FNV-1a over a dataset's features and labels.
std::uint64_t dataset_checksum(const Dataset& ds);

/// Materializes the configured dataset pool (synthetic generation or
/// file loading). Preprocessing happens per dimension inside the runs.
Dataset load_pool(const ExperimentConfig& config);

/// Accuracy versus bandwidth over dimensions x scalings x seeds.
RunReport run_bandwidth_sweep(const ExperimentConfig& config);

/// Same engine keyed by the dimension axis (scaling fixed or listed).
RunReport run_qubit_sweep(const ExperimentConfig& config);

/// Exact row plus shot-noise row (sigma estimated from a probe block,
/// noise injected into the joint train+test Gram, PSD-repaired) per cell.
RunReport run_noise_study(const ExperimentConfig& config);

/// One row per decimals setting per cell; angles are rounded after
/// bandwidth scaling, and "full" reproduces the unrounded path exactly.
RunReport run_precision_study(const ExperimentConfig& config);

/// Writes results.csv, manifest.json, checksums.csv, and timings.csv
/// into out_dir (created if missing). Everything except timings.csv is
/// byte-identical across reruns of the same config.
void emit_outputs(const RunReport& report, const ExperimentConfig& config,
                  const std::filesystem::path& out_dir);

/// The stable results.csv header line, exposed for consumers.
std::string results_csv_header();

/// Formats one row as a results.csv line (no trailing newline).
std::string results_csv_line(const ResultRow& row);

} // namespace qklab
