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
#include <span>
#include <string>

#include <Eigen/Dense>

#include "qklab/feature_map.hpp"

namespace qklab {

/// Options shared by the fidelity Gram builders.
struct GramOptions {
    /// Worker threads for embedding construction and pair assembly.
    int n_threads = 1;
    /// Cap on the statevector cache. All n embeddings are materialized at
    /// once (n * 2^q amplitudes), which is what makes Gram assembly O(n)
    /// embeddings instead of O(n^2).
    std::uint64_t memory_budget_bytes = 4ull << 30;
};

/// Fidelity Gram matrix K[i][j] = |<phi(x_i)|phi(x_j)>|^2 over the rows
/// of X. Only the upper triangle is computed; the lower is mirrored, so
/// the result is symmetric exactly. Throws CapacityError when the
/// statevector cache would exceed the memory budget.
Eigen::MatrixXd gram(const FeatureMap& map, const Eigen::MatrixXd& X,
                     const GramOptions& options = {});

/// Rectangular fidelity kernel, K[i][j] = k(test_i, train_j).
Eigen::MatrixXd cross_gram(const FeatureMap& map, const Eigen::MatrixXd& X_test,
                           const Eigen::MatrixXd& X_train,
                           const GramOptions& options = {});

/// Classical RBF baseline k(x, y) = exp(-gamma * |x - y|^2). The diagonal
/// is set to exactly 1. Throws InputError for gamma <= 0.
Eigen::MatrixXd rbf_gram(const Eigen::MatrixXd& X, double gamma);

/// Rectangular RBF kernel between test rows and train rows.
Eigen::MatrixXd rbf_cross_gram(const Eigen::MatrixXd& X_test,
                               const Eigen::MatrixXd& X_train, double gamma);

/// Sampling-noise probe settings. The probe recomputes a small kernel
/// block from finite shots and reports the spread of the estimates.
struct ShotNoiseConfig {
    int shots = 5000;
    int probe_size = 5;
    int repeats = 10;
    std::uint64_t rng_seed = 0;
    /// When false the probe uses the leading probe_size rows of X; when
    /// true it uses a seed-controlled random subset.
    bool random_probe = false;
};

/// Core of the shot-noise probe, exposed for direct testing: given exact
/// pass probabilities for the probe block, draw `repeats` estimates
/// Binomial(shots, p)/shots per strict-upper entry, take each entry's
/// sample standard deviation, and return the mean over entries.
double shot_sigma_from_probs(const Eigen::MatrixXd& probs, int shots,
                             int repeats, Rng& rng);

/// Estimates the shot-noise level sigma for the kernel of X: embeds a
/// probe_size subset, computes its exact fidelities, and runs the binomial
/// probe above. Throws InputError when probe_size < 2 or exceeds the
/// number of rows.
double estimate_shot_sigma(const FeatureMap& map, const Eigen::MatrixXd& X,
                           const ShotNoiseConfig& config,
                           const GramOptions& options = {});

/// Adds one N(0, sigma^2) draw to each strict-upper entry and mirrors it,
/// leaving the diagonal untouched. The result stays symmetric but may
/// leave [0,1] and lose positive semidefiniteness; repair downstream with
/// nearest_psd. sigma = 0 returns K bit-identically.
Eigen::MatrixXd inject_noise(const Eigen::MatrixXd& K, double sigma,
                             std::uint64_t rng_seed);

/// Frobenius-nearest positive semidefinite matrix: eigendecompose the
/// symmetrized input, clip negative eigenvalues to zero, reconstruct.
/// Idempotent; PSD inputs pass through within 1e-10.
Eigen::MatrixXd nearest_psd(const Eigen::MatrixXd& K);

/// Rounds every entry half-away-from-zero to `decimals` decimal places.
/// In the precision study this is applied to the scaled circuit angles,
/// not the raw features; see ExperimentConfig::decimals.
Eigen::MatrixXd round_inputs(const Eigen::MatrixXd& X, int decimals);

/// Median of the strict upper triangle. Throws InputError for n < 2.
double median_offdiag(const Eigen::MatrixXd& K);

/// Population standard deviation of the strict upper triangle. Throws
/// InputError for n < 2.
double offdiag_stddev(const Eigen::MatrixXd& K);

/// Binary Gram serialization: magic, version, n, then the row-major
/// strict-upper-plus-diagonal triangle as little-endian doubles.
void save_gram_binary(const Eigen::MatrixXd& K,
                      const std::filesystem::path& path);
Eigen::MatrixXd load_gram_binary(const std::filesystem::path& path);

/// CSV dump for inspection: one row per line, entries with max precision.
void save_gram_csv(const Eigen::MatrixXd& K,
                   const std::filesystem::path& path);

/// FNV-1a over the raw bytes of all entries in row-major order. Used to
/// fingerprint per-cell Gram matrices in experiment outputs.
std::uint64_t gram_checksum(const Eigen::MatrixXd& K);

/// Least-squares line fit, used by the concentration diagnostics.
struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Fits y = slope * x + intercept. Throws InputError when sizes differ,
/// fewer than two points are given, or all x are identical.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

} // namespace qklab
