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

#include <Eigen/Dense>

namespace qklab {

/// A binary-labeled dataset: features in rows, labels in {-1, +1}.
struct Dataset {
    Eigen::MatrixXd X;
    std::vector<int> y;
    std::string name;

    Eigen::Index n_rows() const { return X.rows(); }
    Eigen::Index n_features() const { return X.cols(); }
};

/// Loads a pair of IDX files (big-endian, magic 0x00000803 for images and
/// 0x00000801 for labels), keeping only rows labeled class_a or class_b,
/// mapped to -1 and +1. Pixels come out as reals in [0, 255]. Format
/// problems raise FormatError naming the byte offset; an absent class
/// raises InputError.
Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path, int class_a,
                 int class_b);

/// Loads a headered numeric CSV. All columns except `label_column` become
/// features in header order; the label column must hold exactly two
/// distinct values, smaller mapped to -1. Ragged rows, non-numeric or
/// non-finite cells, and a third label value raise FormatError naming the
/// line number.
Dataset load_csv(const std::filesystem::path& path,
                 const std::string& label_column);

/// Column statistics captured by standardize, reusable on held-out data.
struct StandardizeResult {
    Eigen::MatrixXd X;
    Eigen::VectorXd mean;
    /// Population standard deviation (divisor n); 0 marks a constant
    /// column, whose output is all zeros.
    Eigen::VectorXd stddev;
};

/// Centers each column and divides by its population standard deviation.
/// Throws InputError for fewer than two rows.
StandardizeResult standardize(const Eigen::MatrixXd& X);

/// Applies previously fitted statistics: (x - mean) / stddev per column,
/// zero-stddev columns mapped to zeros.
Eigen::MatrixXd apply_standardization(const Eigen::MatrixXd& X,
                                      const Eigen::VectorXd& mean,
                                      const Eigen::VectorXd& stddev);

/// Principal components of a centered matrix.
struct PcaModel {
    Eigen::VectorXd mean;
    /// d x D, orthonormal rows, each row's largest-magnitude entry made
    /// non-negative so results are platform independent.
    Eigen::MatrixXd components;
    /// Descending; singular values squared over n (population convention).
    Eigen::VectorXd explained_variance;
};

/// Fits the top-d principal components via SVD of the centered matrix.
/// Throws InputError unless 1 <= d <= min(n, D).
PcaModel pca_fit(const Eigen::MatrixXd& X, int d);

/// Projects rows onto the fitted components: (X - mean) * components^T.
Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& X);

/// Draws disjoint stratified train and test sets: per-class seeded
/// shuffle, per-side class counts within one of each other. The same
/// seed always yields the same split. Throws InputError when a class
/// cannot fill its quota.
std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, int n_train,
                                             int n_test,
                                             std::uint64_t rng_seed);

/// Two unit-covariance Gaussian blobs at +/- (separation/2) along a
/// seeded random unit direction; the first n/2 rows are class -1. Throws
/// InputError unless n is even and positive and D >= 1.
Dataset synthetic_two_class(int n, int D, double separation,
                            std::uint64_t rng_seed);

/// Versioned little-endian binary cache so sweeps reuse identical
/// preprocessed samples. Loading validates the header and finiteness.
void save_cache(const Dataset& ds, const std::filesystem::path& path);
Dataset load_cache(const std::filesystem::path& path);

/// Feature pipeline settings. Order is fixed: standardize the raw
/// features, project with PCA, then optionally re-standardize the
/// projected coordinates. Bandwidth scaling happens later, inside the
/// feature map.
struct PreprocessOptions {
    int target_dimension = 0;
    bool restandardize = true;
    /// Fit statistics and components on the full pool before splitting
    /// (default); false fits them on the training side only.
    bool pca_on_pool = true;
};

/// Runs standardize -> PCA -> optional re-standardize over a whole
/// dataset.
Dataset preprocess(const Dataset& ds, const PreprocessOptions& options);

/// Pipeline plus split. With pca_on_pool the pool is preprocessed first
/// and then split; otherwise the raw pool is split and all statistics
/// come from the training side.
std::pair<Dataset, Dataset> preprocess_and_split(const Dataset& pool,
                                                 const PreprocessOptions& options,
                                                 int n_train, int n_test,
                                                 std::uint64_t rng_seed);

} // namespace qklab
