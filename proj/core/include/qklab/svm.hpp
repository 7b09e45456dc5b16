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
#include <vector>

#include <Eigen/Dense>

namespace qklab {

/// A classification problem expressed purely through its kernel: the
/// n x n Gram matrix plus labels in {-1, +1}. All solver math works on
/// this pair; raw features never enter.
struct LabeledKernelProblem {
    Eigen::MatrixXd K;
    std::vector<int> y;
};

/// Solver knobs. The stopping rule is the maximal-violating-pair KKT gap.
struct SvcOptions {
    double tol = 1e-4;
    std::uint64_t max_pair_updates = 10'000'000;
    /// Support vectors are the indices with alpha > sv_threshold_factor * C.
    double sv_threshold_factor = 1e-8;
};

/// Trained dual model. alpha keeps full length n (zeros included) so the
/// model can be applied against any cross-kernel that matches the
/// training set column for column.
struct SvcModel {
    std::vector<double> alpha;
    double bias = 0.0;
    double C = 0.0;
    std::vector<std::size_t> support_indices;
    /// Final maximal-violating-pair gap, for diagnostics.
    double kkt_gap = 0.0;
    /// Two-variable updates spent, for diagnostics.
    std::uint64_t pair_updates = 0;
};

/// Solves the dual soft-margin problem
///   maximize sum_i alpha_i - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij
///   subject to sum_i alpha_i y_i = 0 and 0 <= alpha_i <= C
/// with a two-variable working-set method (maximal violating pair).
/// Throws InputError for malformed problems or single-class labels, and
/// ConvergenceError with the residual gap when the update cap is hit.
SvcModel train_svc(const LabeledKernelProblem& problem, double C,
                   const SvcOptions& options = {});

/// Dual objective value of `alpha` for the given problem (maximization
/// form). Exposed for solver verification.
double dual_objective(const LabeledKernelProblem& problem,
                      std::span<const double> alpha);

/// Decision values f_t = sum_i alpha_i y_i cross(t, i) + b. `cross` has
/// one row per evaluation point and one column per training point.
std::vector<double> decision_values(const SvcModel& model,
                                    std::span<const int> y_train,
                                    const Eigen::MatrixXd& cross);

/// Sign rule with f >= 0 mapped to +1.
std::vector<int> predict_labels(std::span<const double> decision);

/// Mean of the two per-class recalls. Throws InputError when sizes
/// differ, inputs are empty, or y_true lacks a class.
double balanced_accuracy(std::span<const int> y_pred,
                         std::span<const int> y_true);

/// The penalty grid used by every selection routine, ascending.
std::vector<double> default_c_grid();

/// RBF bandwidth multipliers; divide by n_train * Var[x] for absolute
/// gamma values.
std::vector<double> default_gamma_multipliers();

/// Maps multipliers to absolute gamma values via multiplier divided by
/// (n_train * Var[x]), where Var[x] is the population variance over all
/// entries of X_train. Throws InputError when that variance is zero.
std::vector<double> scaled_gamma_grid(std::span<const double> multipliers,
                                      const Eigen::MatrixXd& X_train);

/// Stratified fold assignment: indices of each class are shuffled with a
/// seeded generator, then dealt round-robin across folds with a fold
/// counter that runs on through both classes, keeping per-fold class
/// counts within one of each other. Returns fold -> sorted indices.
/// Throws InputError when folds < 2, folds > n, or a fold ends up empty.
std::vector<std::vector<std::size_t>> stratified_folds(
    std::span<const int> y, int folds, std::uint64_t rng_seed);

/// Outcome of a penalty selection sweep. `scores` aligns with the grid.
struct CSelection {
    double C = 0.0;
    SvcModel model;
    std::vector<double> scores;
};

/// Picks the grid C with the best training balanced accuracy, ties going
/// to the smallest C, and returns the model retrained at that C.
CSelection select_c_by_train_score(const LabeledKernelProblem& problem,
                                   std::span<const double> grid,
                                   const SvcOptions& options = {},
                                   int n_threads = 1);

/// Picks C by stratified k-fold cross-validation on Gram slices, ties
/// going to the smallest C, then retrains on the full problem. Fold
/// scores average per-class recall over the classes present in each
/// validation fold, so leave-one-out degenerates to per-point scoring.
CSelection select_c_by_cv(const LabeledKernelProblem& problem,
                          std::span<const double> grid, int folds,
                          std::uint64_t rng_seed,
                          const SvcOptions& options = {}, int n_threads = 1);

/// Result of the joint (C, gamma) search for the RBF baseline.
struct RbfSelection {
    double C = 0.0;
    double gamma = 0.0;
    double cv_score = 0.0;
};

/// Joint cross-validated grid search for the RBF kernel. Multipliers are
/// scaled by 1 / (n_train * Var[x]) internally. Fold assignment is fixed
/// across the whole grid. Ties prefer the smallest C, then the smallest
/// gamma.
RbfSelection rbf_joint_grid_search(const Eigen::MatrixXd& X,
                                   std::span<const int> y,
                                   std::span<const double> c_grid,
                                   std::span<const double> gamma_multipliers,
                                   int folds, std::uint64_t rng_seed,
                                   const SvcOptions& options = {},
                                   int n_threads = 1);

/// Text round-trip for trained models (n, C, bias, alpha, support set).
void save_model_text(const SvcModel& model, const std::filesystem::path& path);
SvcModel load_model_text(const std::filesystem::path& path);

} // namespace qklab
