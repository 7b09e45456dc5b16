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

#include "qklab/svm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "qklab/errors.hpp"
#include "qklab/kernel.hpp"
#include "qklab/parallel.hpp"
#include "qklab/rng.hpp"

namespace qklab {

namespace {

void validate_problem(const LabeledKernelProblem& problem) {
    const auto n = static_cast<std::size_t>(problem.K.rows());
    if (problem.K.rows() != problem.K.cols()) {
        throw InputError("svc: kernel matrix must be square");
    }
    if (problem.y.size() != n || n == 0) {
        throw InputError("svc: label count " + std::to_string(problem.y.size()) +
                         " does not match kernel size " + std::to_string(n));
    }
    bool has_pos = false;
    bool has_neg = false;
    for (const int label : problem.y) {
        if (label == 1) {
            has_pos = true;
        } else if (label == -1) {
            has_neg = true;
        } else {
            throw InputError("svc: labels must be -1 or +1, got " +
                             std::to_string(label));
        }
    }
    if (!has_pos || !has_neg) {
        throw InputError("svc: both classes must be present");
    }
}

/// Mean per-class recall over the classes that appear in y_true. The
/// public balanced_accuracy demands both classes; this relaxation is what
/// cross-validation folds score with, so leave-one-out still works.
double recall_mean_present(std::span<const int> y_pred,
                           std::span<const int> y_true) {
    double sum = 0.0;
    int classes = 0;
    for (const int cls : {-1, 1}) {
        std::size_t total = 0;
        std::size_t hit = 0;
        for (std::size_t i = 0; i < y_true.size(); ++i) {
            if (y_true[i] == cls) {
                ++total;
                if (y_pred[i] == cls) {
                    ++hit;
                }
            }
        }
        if (total > 0) {
            sum += static_cast<double>(hit) / static_cast<double>(total);
            ++classes;
        }
    }
    return sum / classes;
}

struct FoldSlice {
    LabeledKernelProblem train;
    Eigen::MatrixXd cross;
    std::vector<int> y_val;
};

/// Cuts one fold's training problem and validation cross-kernel out of
/// the precomputed Gram. Built once per fold and shared by every C.
FoldSlice make_fold_slice(const Eigen::MatrixXd& K, std::span<const int> y,
                          const std::vector<std::size_t>& val_idx) {
    std::vector<char> in_val(y.size(), 0);
    for (const std::size_t i : val_idx) {
        in_val[i] = 1;
    }
    std::vector<std::size_t> train_idx;
    train_idx.reserve(y.size() - val_idx.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!in_val[i]) {
            train_idx.push_back(i);
        }
    }
    FoldSlice slice;
    const auto nt = static_cast<Eigen::Index>(train_idx.size());
    const auto nv = static_cast<Eigen::Index>(val_idx.size());
    slice.train.K.resize(nt, nt);
    slice.train.y.resize(train_idx.size());
    for (Eigen::Index a = 0; a < nt; ++a) {
        const auto ia = train_idx[static_cast<std::size_t>(a)];
        slice.train.y[static_cast<std::size_t>(a)] = y[ia];
        for (Eigen::Index b = 0; b < nt; ++b) {
            slice.train.K(a, b) = K(static_cast<Eigen::Index>(ia),
                                    static_cast<Eigen::Index>(
                                        train_idx[static_cast<std::size_t>(b)]));
        }
    }
    slice.cross.resize(nv, nt);
    slice.y_val.resize(val_idx.size());
    for (Eigen::Index a = 0; a < nv; ++a) {
        const auto ia = val_idx[static_cast<std::size_t>(a)];
        slice.y_val[static_cast<std::size_t>(a)] = y[ia];
        for (Eigen::Index b = 0; b < nt; ++b) {
            slice.cross(a, b) = K(static_cast<Eigen::Index>(ia),
                                  static_cast<Eigen::Index>(
                                      train_idx[static_cast<std::size_t>(b)]));
        }
    }
    return slice;
}

double cv_score_for_c(const std::vector<FoldSlice>& slices, double C,
                      const SvcOptions& options) {
    double sum = 0.0;
    for (const auto& slice : slices) {
        const SvcModel model = train_svc(slice.train, C, options);
        const auto f = decision_values(model, slice.train.y, slice.cross);
        const auto pred = predict_labels(f);
        sum += recall_mean_present(pred, slice.y_val);
    }
    return sum / static_cast<double>(slices.size());
}

void check_grid(std::span<const double> grid, const char* what) {
    if (grid.empty()) {
        throw InputError(std::string(what) + ": empty grid");
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0)) {
            throw InputError(std::string(what) + ": grid values must be positive");
        }
        if (i > 0 && grid[i] <= grid[i - 1]) {
            throw InputError(std::string(what) +
                             ": grid must be strictly increasing");
        }
    }
}

} // namespace

SvcModel train_svc(const LabeledKernelProblem& problem, double C,
                   const SvcOptions& options) {
    validate_problem(problem);
    if (!(C > 0.0)) {
        throw InputError("svc: C must be positive, got " + std::to_string(C));
    }
    const std::size_t n = problem.y.size();
    const Eigen::MatrixXd& K = problem.K;
    const std::vector<int>& y = problem.y;

    // Gradient of the minimization form 1/2 a'Qa - e'a with
    // Q_ij = y_i y_j K_ij; at alpha = 0 the gradient is -e.
    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);

    const auto in_up = [&](std::size_t t) {
        return (y[t] == 1 && alpha[t] < C) || (y[t] == -1 && alpha[t] > 0.0);
    };
    const auto in_low = [&](std::size_t t) {
        return (y[t] == 1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < C);
    };

    std::uint64_t updates = 0;
    double gap = std::numeric_limits<double>::infinity();
    while (true) {
        // Maximal violating pair: i maximizes -y G over the set that can
        // move up, j minimizes it over the set that can move down.
        double m_up = -std::numeric_limits<double>::infinity();
        double m_low = std::numeric_limits<double>::infinity();
        std::size_t i = n;
        std::size_t j = n;
        for (std::size_t t = 0; t < n; ++t) {
            const double score = -y[t] * grad[t];
            if (in_up(t) && score > m_up) {
                m_up = score;
                i = t;
            }
            if (in_low(t) && score < m_low) {
                m_low = score;
                j = t;
            }
        }
        gap = m_up - m_low;
        if (gap <= options.tol) {
            break;
        }
        if (updates >= options.max_pair_updates) {
            throw ConvergenceError(
                "svc: update cap " + std::to_string(options.max_pair_updates) +
                " reached with KKT gap " + std::to_string(gap));
        }

        const auto ei = static_cast<Eigen::Index>(i);
        const auto ej = static_cast<Eigen::Index>(j);
        const double old_i = alpha[i];
        const double old_j = alpha[j];
        if (y[i] != y[j]) {
            // Curvature along the feasible direction e_i + e_j; with
            // Q = yy'K the cross sign flips, giving the same squared
            // feature-space distance as the equal-label branch.
            double quad = K(ei, ei) + K(ej, ej) - 2.0 * K(ei, ej);
            if (quad <= 0.0) {
                quad = 1e-12;
            }
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else {
                if (alpha[i] < 0.0) {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
            }
            if (diff > 0.0) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = C - diff;
                }
            } else {
                if (alpha[j] > C) {
                    alpha[j] = C;
                    alpha[i] = C + diff;
                }
            }
        } else {
            double quad = K(ei, ei) + K(ej, ej) - 2.0 * K(ei, ej);
            if (quad <= 0.0) {
                quad = 1e-12;
            }
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = sum - C;
                }
            } else {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
            }
            if (sum > C) {
                if (alpha[j] > C) {
                    alpha[j] = C;
                    alpha[i] = sum - C;
                }
            } else {
                if (alpha[i] < 0.0) {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
        }

        const double di = alpha[i] - old_i;
        const double dj = alpha[j] - old_j;
        for (std::size_t t = 0; t < n; ++t) {
            const auto et = static_cast<Eigen::Index>(t);
            grad[t] += y[t] * (y[i] * K(et, ei) * di + y[j] * K(et, ej) * dj);
        }
        ++updates;
    }

    SvcModel model;
    model.C = C;
    model.kkt_gap = gap;
    model.pair_updates = updates;

    // Bias from free support vectors; for them -y G equals b exactly at
    // the optimum. With none free, any b inside the final KKT interval
    // is optimal; take its midpoint.
    double b_sum = 0.0;
    std::size_t b_count = 0;
    double m_up = -std::numeric_limits<double>::infinity();
    double m_low = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
        const double score = -y[t] * grad[t];
        if (alpha[t] > 0.0 && alpha[t] < C) {
            b_sum += score;
            ++b_count;
        }
        if (in_up(t)) {
            m_up = std::max(m_up, score);
        }
        if (in_low(t)) {
            m_low = std::min(m_low, score);
        }
    }
    model.bias = b_count > 0 ? b_sum / static_cast<double>(b_count)
                             : 0.5 * (m_up + m_low);

    const double threshold = options.sv_threshold_factor * C;
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > threshold) {
            model.support_indices.push_back(t);
        }
    }
    model.alpha = std::move(alpha);
    return model;
}

double dual_objective(const LabeledKernelProblem& problem,
                      std::span<const double> alpha) {
    if (alpha.size() != problem.y.size()) {
        throw InputError("dual_objective: alpha length mismatch");
    }
    const auto n = static_cast<Eigen::Index>(alpha.size());
    double linear = 0.0;
    double quadratic = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto si = static_cast<std::size_t>(i);
        linear += alpha[si];
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto sj = static_cast<std::size_t>(j);
            quadratic += alpha[si] * alpha[sj] * problem.y[si] * problem.y[sj] *
                         problem.K(i, j);
        }
    }
    return linear - 0.5 * quadratic;
}

std::vector<double> decision_values(const SvcModel& model,
                                    std::span<const int> y_train,
                                    const Eigen::MatrixXd& cross) {
    const std::size_t n = model.alpha.size();
    if (y_train.size() != n ||
        static_cast<std::size_t>(cross.cols()) != n) {
        throw InputError("decision_values: cross kernel has " +
                         std::to_string(cross.cols()) +
                         " columns, model has " + std::to_string(n) +
                         " training points");
    }
    std::vector<double> f(static_cast<std::size_t>(cross.rows()), model.bias);
    for (std::size_t i = 0; i < n; ++i) {
        if (model.alpha[i] == 0.0) {
            continue;
        }
        const double coef = model.alpha[i] * y_train[i];
        for (Eigen::Index t = 0; t < cross.rows(); ++t) {
            f[static_cast<std::size_t>(t)] +=
                coef * cross(t, static_cast<Eigen::Index>(i));
        }
    }
    return f;
}

std::vector<int> predict_labels(std::span<const double> decision) {
    std::vector<int> labels(decision.size());
    for (std::size_t i = 0; i < decision.size(); ++i) {
        labels[i] = decision[i] >= 0.0 ? 1 : -1;
    }
    return labels;
}

double balanced_accuracy(std::span<const int> y_pred,
                         std::span<const int> y_true) {
    if (y_pred.size() != y_true.size() || y_true.empty()) {
        throw InputError("balanced_accuracy: size mismatch or empty input");
    }
    bool has_pos = false;
    bool has_neg = false;
    for (const int label : y_true) {
        has_pos = has_pos || label == 1;
        has_neg = has_neg || label == -1;
    }
    if (!has_pos || !has_neg) {
        throw InputError("balanced_accuracy: y_true must contain both classes");
    }
    return recall_mean_present(y_pred, y_true);
}

std::vector<double> default_c_grid() {
    return {0.006, 0.015, 0.03, 0.0625, 0.125, 0.25,  0.5,   1.0,   2.0,
            4.0,   8.0,   16.0, 32.0,   64.0,  128.0, 256.0, 512.0, 1024.0};
}

std::vector<double> default_gamma_multipliers() {
    return {0.25,  0.5,   1.0,    2.0,    3.0,    4.0,    5.0,   20.0,
            50.0,  100.0, 200.0,  500.0,  1000.0, 5000.0, 10000.0};
}

std::vector<double> scaled_gamma_grid(std::span<const double> multipliers,
                                      const Eigen::MatrixXd& X_train) {
    check_grid(multipliers, "scaled_gamma_grid");
    if (X_train.rows() == 0 || X_train.cols() == 0) {
        throw InputError("scaled_gamma_grid: empty training matrix");
    }
    const double count = static_cast<double>(X_train.size());
    const double mean = X_train.sum() / count;
    double var = 0.0;
    for (Eigen::Index i = 0; i < X_train.rows(); ++i) {
        for (Eigen::Index j = 0; j < X_train.cols(); ++j) {
            const double d = X_train(i, j) - mean;
            var += d * d;
        }
    }
    var /= count;
    if (var == 0.0) {
        throw InputError("scaled_gamma_grid: training data has zero variance");
    }
    const double denom = static_cast<double>(X_train.rows()) * var;
    std::vector<double> out;
    out.reserve(multipliers.size());
    for (const double m : multipliers) {
        out.push_back(m / denom);
    }
    return out;
}

std::vector<std::vector<std::size_t>> stratified_folds(
    std::span<const int> y, int folds, std::uint64_t rng_seed) {
    if (folds < 2) {
        throw InputError("stratified_folds: need at least 2 folds");
    }
    if (static_cast<std::size_t>(folds) > y.size()) {
        throw InputError("stratified_folds: more folds than points");
    }
    std::vector<std::vector<std::size_t>> assignment(
        static_cast<std::size_t>(folds));
    std::size_t counter = 0;
    for (const int cls : {-1, 1}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (y[i] == cls) {
                members.push_back(i);
            }
        }
        Rng rng = Rng::keyed(rng_seed, cls == -1 ? 0x666f6c642dull
                                                 : 0x666f6c642bull);
        rng.shuffle(members);
        // The fold counter runs on across classes so small datasets still
        // spread over every fold (leave-one-out stays one point per fold).
        for (const std::size_t idx : members) {
            assignment[counter % static_cast<std::size_t>(folds)].push_back(idx);
            ++counter;
        }
    }
    for (auto& fold : assignment) {
        if (fold.empty()) {
            throw InputError("stratified_folds: a fold came up empty");
        }
        std::sort(fold.begin(), fold.end());
    }
    return assignment;
}

CSelection select_c_by_train_score(const LabeledKernelProblem& problem,
                                   std::span<const double> grid,
                                   const SvcOptions& options, int n_threads) {
    validate_problem(problem);
    check_grid(grid, "select_c_by_train_score");
    std::vector<double> scores(grid.size(), 0.0);
    parallel_for(grid.size(), n_threads, [&](std::size_t g) {
        const SvcModel model = train_svc(problem, grid[g], options);
        const auto f = decision_values(model, problem.y, problem.K);
        scores[g] = balanced_accuracy(predict_labels(f), problem.y);
    });
    std::size_t best = 0;
    for (std::size_t g = 1; g < grid.size(); ++g) {
        if (scores[g] > scores[best]) {
            best = g;
        }
    }
    CSelection result;
    result.C = grid[best];
    result.model = train_svc(problem, result.C, options);
    result.scores = std::move(scores);
    return result;
}

CSelection select_c_by_cv(const LabeledKernelProblem& problem,
                          std::span<const double> grid, int folds,
                          std::uint64_t rng_seed, const SvcOptions& options,
                          int n_threads) {
    validate_problem(problem);
    check_grid(grid, "select_c_by_cv");
    const auto assignment = stratified_folds(problem.y, folds, rng_seed);
    std::vector<FoldSlice> slices;
    slices.reserve(assignment.size());
    for (const auto& val_idx : assignment) {
        slices.push_back(make_fold_slice(problem.K, problem.y, val_idx));
    }
    std::vector<double> scores(grid.size(), 0.0);
    parallel_for(grid.size(), n_threads, [&](std::size_t g) {
        scores[g] = cv_score_for_c(slices, grid[g], options);
    });
    std::size_t best = 0;
    for (std::size_t g = 1; g < grid.size(); ++g) {
        if (scores[g] > scores[best]) {
            best = g;
        }
    }
    CSelection result;
    result.C = grid[best];
    result.model = train_svc(problem, result.C, options);
    result.scores = std::move(scores);
    return result;
}

RbfSelection rbf_joint_grid_search(const Eigen::MatrixXd& X,
                                   std::span<const int> y,
                                   std::span<const double> c_grid,
                                   std::span<const double> gamma_multipliers,
                                   int folds, std::uint64_t rng_seed,
                                   const SvcOptions& options, int n_threads) {
    check_grid(c_grid, "rbf_joint_grid_search");
    const auto gammas = scaled_gamma_grid(gamma_multipliers, X);
    if (static_cast<std::size_t>(X.rows()) != y.size()) {
        throw InputError("rbf_joint_grid_search: label count mismatch");
    }
    const auto assignment = stratified_folds(y, folds, rng_seed);

    std::vector<std::vector<double>> scores(
        gammas.size(), std::vector<double>(c_grid.size(), 0.0));
    parallel_for(gammas.size(), n_threads, [&](std::size_t gi) {
        const Eigen::MatrixXd K = rbf_gram(X, gammas[gi]);
        std::vector<FoldSlice> slices;
        slices.reserve(assignment.size());
        for (const auto& val_idx : assignment) {
            slices.push_back(make_fold_slice(K, y, val_idx));
        }
        for (std::size_t ci = 0; ci < c_grid.size(); ++ci) {
            scores[gi][ci] = cv_score_for_c(slices, c_grid[ci], options);
        }
    });

    // Best score wins; ties prefer the smallest C, then the smallest gamma.
    RbfSelection best;
    best.cv_score = -1.0;
    for (std::size_t ci = 0; ci < c_grid.size(); ++ci) {
        for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
            if (scores[gi][ci] > best.cv_score) {
                best.cv_score = scores[gi][ci];
                best.C = c_grid[ci];
                best.gamma = gammas[gi];
            }
        }
    }
    return best;
}

void save_model_text(const SvcModel& model,
                     const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw FormatError("cannot open for writing: " + path.string());
    }
    out.precision(17);
    out << "qklab-svc 1\n";
    out << "n " << model.alpha.size() << '\n';
    out << "C " << model.C << '\n';
    out << "bias " << model.bias << '\n';
    out << "alpha";
    for (const double a : model.alpha) {
        out << ' ' << a;
    }
    out << '\n';
    out << "support";
    for (const std::size_t s : model.support_indices) {
        out << ' ' << s;
    }
    out << '\n';
    if (!out) {
        throw FormatError("write failed: " + path.string());
    }
}

SvcModel load_model_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw FormatError("cannot open: " + path.string());
    }
    std::string line;
    if (!std::getline(in, line) || line != "qklab-svc 1") {
        throw FormatError("not a qklab-svc model file: " + path.string());
    }
    SvcModel model;
    std::size_t n = 0;
    const auto next_line = [&](const std::string& key) {
        if (!std::getline(in, line)) {
            throw FormatError("truncated model file at '" + key +
                              "': " + path.string());
        }
        std::istringstream stream(line);
        std::string label;
        stream >> label;
        if (label != key) {
            throw FormatError("expected '" + key + "', got '" + label +
                              "': " + path.string());
        }
        return stream;
    };
    {
        auto stream = next_line("n");
        if (!(stream >> n)) {
            throw FormatError("bad point count: " + path.string());
        }
    }
    {
        auto stream = next_line("C");
        if (!(stream >> model.C)) {
            throw FormatError("bad C: " + path.string());
        }
    }
    {
        auto stream = next_line("bias");
        if (!(stream >> model.bias)) {
            throw FormatError("bad bias: " + path.string());
        }
    }
    {
        auto stream = next_line("alpha");
        double a = 0.0;
        while (stream >> a) {
            model.alpha.push_back(a);
        }
        if (model.alpha.size() != n) {
            throw FormatError("alpha count mismatch: " + path.string());
        }
    }
    {
        auto stream = next_line("support");
        std::size_t s = 0;
        while (stream >> s) {
            if (s >= n) {
                throw FormatError("support index out of range: " +
                                  path.string());
            }
            model.support_indices.push_back(s);
        }
    }
    return model;
}

} // namespace qklab
