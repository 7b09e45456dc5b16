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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <vector>

#include <doctest.h>

#include "oracles.hpp"
#include "qklab/errors.hpp"
#include "qklab/rng.hpp"
#include "qklab/svm.hpp"

using namespace qklab;

namespace {

// Random correlation-like PSD kernel: A A^T rescaled to unit diagonal.
LabeledKernelProblem random_problem(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd A(static_cast<Eigen::Index>(n),
                      static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            A(i, j) = rng.normal();
    Eigen::MatrixXd K = A * A.transpose();
    for (Eigen::Index i = 0; i < K.rows(); ++i)
        for (Eigen::Index j = 0; j < K.cols(); ++j)
            if (i != j)
                K(i, j) /= std::sqrt(K(i, i) * K(j, j));
    for (Eigen::Index i = 0; i < K.rows(); ++i) K(i, i) = 1.0;

    LabeledKernelProblem problem;
    problem.K = K;
    problem.y.resize(n);
    // Guarantee both classes, random otherwise.
    problem.y[0] = 1;
    problem.y[1] = -1;
    for (std::size_t i = 2; i < n; ++i)
        problem.y[i] = rng.uniform() < 0.5 ? 1 : -1;
    return problem;
}

double train_accuracy(const LabeledKernelProblem& problem,
                      const SvcModel& model) {
    const auto f = decision_values(model, problem.y, problem.K);
    return balanced_accuracy(predict_labels(f), problem.y);
}

} // namespace

TEST_CASE("train_svc rejects malformed problems") {
    LabeledKernelProblem p;
    p.K = Eigen::MatrixXd::Identity(2, 3);
    p.y = {1, -1};
    CHECK_THROWS_AS(train_svc(p, 1.0), InputError);

    p.K = Eigen::MatrixXd::Identity(2, 2);
    p.y = {1};
    CHECK_THROWS_AS(train_svc(p, 1.0), InputError);

    p.y = {1, 2};
    CHECK_THROWS_AS(train_svc(p, 1.0), InputError);

    p.y = {1, 1};
    CHECK_THROWS_AS(train_svc(p, 1.0), InputError);

    p.y = {1, -1};
    CHECK_THROWS_AS(train_svc(p, 0.0), InputError);
    CHECK_THROWS_AS(train_svc(p, -2.0), InputError);
}

TEST_CASE("closed-form toy: identity kernel, one point per class") {
    LabeledKernelProblem p;
    p.K = Eigen::MatrixXd::Identity(2, 2);
    p.y = {1, -1};
    const auto model = train_svc(p, 1.0);
    CHECK(model.alpha[0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(model.alpha[1] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(model.bias == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(model.support_indices.size() == 2);

    // Hand expansion of the decision value at train point 0.
    Eigen::MatrixXd cross = p.K.row(0);
    const auto f = decision_values(model, p.y, cross);
    const double expect = p.K(0, 0) * model.alpha[0] -
                          p.K(0, 1) * model.alpha[1] + model.bias;
    CHECK(f[0] == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("duplicate points with opposite labels hit the C bound") {
    LabeledKernelProblem p;
    p.K = Eigen::MatrixXd::Ones(2, 2);
    p.y = {1, -1};
    const auto model = train_svc(p, 2.0);
    CHECK(model.alpha[0] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(model.alpha[1] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("solver matches the projected-gradient oracle on 20 problems") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto p = random_problem(8, 1000 + seed);
        const double C = seed % 2 == 0 ? 1.0 : 10.0;
        const auto model = train_svc(p, C);

        // Feasibility is exact, not approximate.
        double balance = 0.0;
        for (std::size_t i = 0; i < 8; ++i) {
            CHECK(model.alpha[i] >= 0.0);
            CHECK(model.alpha[i] <= C);
            balance += model.alpha[i] * p.y[i];
        }
        CHECK(std::abs(balance) <= 1e-8);

        const auto ref = oracles::projected_gradient_qp(p.K, p.y, C);
        const double got = dual_objective(p, model.alpha);
        const double expect = oracles::dual_objective_ref(p.K, p.y, ref);
        CHECK(std::abs(got - expect) <= 1e-6 * (1.0 + std::abs(expect)));
    }
}

TEST_CASE("convergence cap raises with the residual gap") {
    auto p = random_problem(16, 77);
    SvcOptions opts;
    opts.max_pair_updates = 1;
    CHECK_THROWS_AS(train_svc(p, 4.0, opts), ConvergenceError);
}

TEST_CASE("more penalty budget never hurts the training fit") {
    for (std::uint64_t seed = 31; seed < 36; ++seed) {
        const auto p = random_problem(12, seed);
        const auto grid = default_c_grid();
        const auto lo = train_svc(p, grid.front());
        const auto hi = train_svc(p, grid.back());
        CHECK(train_accuracy(p, hi) >= train_accuracy(p, lo) - 1e-9);
    }
}

TEST_CASE("decision_values edge cases") {
    SvcModel model;
    model.alpha = {0.0, 0.0, 0.0};
    model.bias = 0.5;
    const std::vector<int> y{1, -1, 1};
    const Eigen::MatrixXd cross = Eigen::MatrixXd::Random(4, 3);
    const auto f = decision_values(model, y, cross);
    for (const double v : f) CHECK(v == 0.5);

    const Eigen::MatrixXd bad = Eigen::MatrixXd::Random(4, 2);
    CHECK_THROWS_AS(decision_values(model, y, bad), InputError);
}

TEST_CASE("training decisions are reproduced through a cross slice") {
    const auto p = random_problem(10, 55);
    const auto model = train_svc(p, 2.0);
    const auto direct = decision_values(model, p.y, p.K);
    const Eigen::MatrixXd one_row = p.K.row(4);
    const auto sliced = decision_values(model, p.y, one_row);
    CHECK(sliced[0] == doctest::Approx(direct[4]).epsilon(1e-10));
}

TEST_CASE("predict_labels maps the sign rule with f >= 0 positive") {
    const std::vector<double> f{-0.2, 0.0, 0.4, -1e-15, 1e-15};
    const auto labels = predict_labels(f);
    CHECK(labels == std::vector<int>{-1, 1, 1, -1, 1});
}

TEST_CASE("balanced accuracy closed forms and errors") {
    const std::vector<int> truth{1, 1, -1, -1};
    CHECK(balanced_accuracy(truth, truth) == 1.0);

    const std::vector<int> constant{1, 1, 1, 1};
    CHECK(balanced_accuracy(constant, truth) == 0.5);

    const std::vector<int> pred{1, -1, -1, -1};
    CHECK(balanced_accuracy(pred, truth) == doctest::Approx(0.75));

    const std::vector<int> wrong_size{1, -1};
    CHECK_THROWS_AS(balanced_accuracy(wrong_size, truth), InputError);
    CHECK_THROWS_AS(balanced_accuracy(constant, constant), InputError);
}

TEST_CASE("default grids are pinned") {
    const auto c = default_c_grid();
    const std::vector<double> c_expect{
        0.006, 0.015, 0.03, 0.0625, 0.125, 0.25,  0.5,   1.0,   2.0,
        4.0,   8.0,   16.0, 32.0,   64.0,  128.0, 256.0, 512.0, 1024.0};
    CHECK(c == c_expect);
    CHECK(std::is_sorted(c.begin(), c.end()));

    const auto g = default_gamma_multipliers();
    const std::vector<double> g_expect{0.25,  0.5,   1.0,    2.0,   3.0,
                                       4.0,   5.0,   20.0,   50.0,  100.0,
                                       200.0, 500.0, 1000.0, 5000.0, 10000.0};
    CHECK(g == g_expect);
    CHECK(g.size() == 15);
}

TEST_CASE("scaled_gamma_grid divides by count times variance") {
    Eigen::MatrixXd X(2, 2);
    X << 1.0, -1.0,
         -1.0, 1.0; // mean 0, population variance 1
    const std::vector<double> mult{1.0, 4.0};
    const auto gammas = scaled_gamma_grid(mult, X);
    REQUIRE(gammas.size() == 2);
    // denominator = n_train * Var[x] = 2 * 1.
    CHECK(gammas[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(gammas[1] == doctest::Approx(2.0).epsilon(1e-12));

    const Eigen::MatrixXd constant = Eigen::MatrixXd::Ones(3, 2);
    CHECK_THROWS_AS(scaled_gamma_grid(mult, constant), InputError);
}

TEST_CASE("stratified folds balance classes and partition the data") {
    std::vector<int> y;
    for (int i = 0; i < 23; ++i) y.push_back(i < 13 ? 1 : -1);
    const auto folds = stratified_folds(y, 5, 9);
    REQUIRE(folds.size() == 5);

    std::set<std::size_t> seen;
    for (const auto& fold : folds) {
        CHECK(!fold.empty());
        CHECK(std::is_sorted(fold.begin(), fold.end()));
        int pos = 0, neg = 0;
        for (const std::size_t i : fold) {
            CHECK(seen.insert(i).second); // disjoint
            (y[i] == 1 ? pos : neg)++;
        }
        // Class counts per fold within one of each other across folds.
        CHECK(pos >= 2);
        CHECK(pos <= 3);
        CHECK(neg >= 2);
        CHECK(neg <= 2);
    }
    CHECK(seen.size() == y.size());

    // Determinism and seed sensitivity.
    CHECK(stratified_folds(y, 5, 9) == folds);

    CHECK_THROWS_AS(stratified_folds(y, 1, 9), InputError);
    CHECK_THROWS_AS(stratified_folds(y, 24, 9), InputError);
}

TEST_CASE("leave-one-out folds hold one point each") {
    const std::vector<int> y{1, 1, 1, -1, -1, -1};
    const auto folds = stratified_folds(y, 6, 3);
    REQUIRE(folds.size() == 6);
    for (const auto& fold : folds) CHECK(fold.size() == 1);
}

TEST_CASE("select_c_by_train_score tie-breaks toward the smallest C") {
    // Identity kernel separates every class assignment at every C.
    LabeledKernelProblem p;
    p.K = Eigen::MatrixXd::Identity(6, 6);
    p.y = {1, 1, 1, -1, -1, -1};
    const auto grid = default_c_grid();
    const auto sel = select_c_by_train_score(p, grid);
    CHECK(sel.C == grid.front());
    CHECK(sel.scores.front() == 1.0);

    // Size-one grid returns its only element.
    const std::vector<double> single{0.25};
    CHECK(select_c_by_train_score(p, single).C == 0.25);
}

TEST_CASE("select_c_by_train_score returns the grid argmax") {
    const auto p = random_problem(14, 333);
    const std::vector<double> grid{0.006, 0.5, 1024.0};
    const auto sel = select_c_by_train_score(p, grid);
    REQUIRE(sel.scores.size() == grid.size());
    const double best = *std::max_element(sel.scores.begin(), sel.scores.end());
    // The selected C scores best and is the smallest doing so.
    for (std::size_t g = 0; g < grid.size(); ++g) {
        if (grid[g] == sel.C) {
            CHECK(sel.scores[g] == best);
            break;
        }
        CHECK(sel.scores[g] < best);
    }
    // Thread count must not change the selection.
    const auto sel4 = select_c_by_train_score(p, grid, {}, 4);
    CHECK(sel4.C == sel.C);
    CHECK(sel4.scores == sel.scores);
}

TEST_CASE("select_c_by_cv is deterministic and tie-breaks to smallest C") {
    // A separable configuration whose folds stay class-balanced (16
    // points, 4 folds, so every fold trains on 6+6): each fold then
    // classifies perfectly at every C and the tie rule decides.
    LabeledKernelProblem p;
    const int n = 16;
    p.K = Eigen::MatrixXd::Constant(n, n, 0.05);
    for (int i = 0; i < n; ++i) p.K(i, i) = 1.0;
    // Strong within-class similarity.
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && (i < 8) == (j < 8)) p.K(i, j) = 0.9;
    for (int i = 0; i < n; ++i) p.y.push_back(i < 8 ? 1 : -1);

    const auto grid = default_c_grid();
    const auto sel = select_c_by_cv(p, grid, 4, 21);
    CHECK(sel.C == grid.front());
    for (const double s : sel.scores) CHECK(s == 1.0);

    const auto again = select_c_by_cv(p, grid, 4, 21);
    CHECK(again.C == sel.C);
    CHECK(again.scores == sel.scores);

    const auto threaded = select_c_by_cv(p, grid, 4, 21, {}, 3);
    CHECK(threaded.C == sel.C);
    CHECK(threaded.scores == sel.scores);
}

TEST_CASE("select_c_by_cv degrades to leave-one-out") {
    const auto p = random_problem(6, 88);
    const std::vector<double> grid{0.5, 8.0};
    const auto sel = select_c_by_cv(p, grid, 6, 5);
    CHECK((sel.C == 0.5 || sel.C == 8.0));
    CHECK_THROWS_AS(select_c_by_cv(p, grid, 7, 5), InputError);
}

TEST_CASE("rbf joint grid search separates two blobs") {
    Rng rng(404);
    const int per_class = 30;
    Eigen::MatrixXd X(2 * per_class, 3);
    std::vector<int> y;
    for (int i = 0; i < 2 * per_class; ++i) {
        const double center = i < per_class ? -3.0 : 3.0;
        for (int j = 0; j < 3; ++j) X(i, j) = center + rng.normal();
        y.push_back(i < per_class ? -1 : 1);
    }
    const auto c_grid = std::vector<double>{0.25, 1.0, 16.0};
    const auto sel = rbf_joint_grid_search(X, y, c_grid,
                                           default_gamma_multipliers(), 5, 7);
    CHECK(sel.cv_score >= 0.95);
    CHECK(sel.gamma > 0.0);

    const Eigen::MatrixXd constant = Eigen::MatrixXd::Ones(10, 3);
    std::vector<int> cy(10, 1);
    for (int i = 0; i < 5; ++i) cy[static_cast<std::size_t>(i)] = -1;
    CHECK_THROWS_AS(rbf_joint_grid_search(constant, cy, c_grid,
                                          default_gamma_multipliers(), 5, 7),
                    InputError);
}

TEST_CASE("model text round trip") {
    const auto p = random_problem(7, 99);
    const auto model = train_svc(p, 4.0);
    const auto path =
        std::filesystem::temp_directory_path() / "qklab_model_test.txt";
    save_model_text(model, path);
    const auto back = load_model_text(path);
    CHECK(back.C == model.C);
    CHECK(back.bias == model.bias);
    REQUIRE(back.alpha.size() == model.alpha.size());
    for (std::size_t i = 0; i < model.alpha.size(); ++i)
        CHECK(back.alpha[i] == model.alpha[i]);
    CHECK(back.support_indices == model.support_indices);

    {
        std::ofstream out(path, std::ios::trunc);
        out << "not-a-model\n";
    }
    CHECK_THROWS_AS(load_model_text(path), FormatError);
    CHECK_THROWS_AS(
        load_model_text(std::filesystem::temp_directory_path() /
                        "qklab_model_missing.txt"),
        FormatError);
    std::filesystem::remove(path);
}
