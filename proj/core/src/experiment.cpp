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

#include "qklab/experiment.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <memory>

#include <nlohmann/json.hpp>

#include "qklab/errors.hpp"
#include "qklab/kernel.hpp"
#include "qklab/rng.hpp"
#include "qklab/svm.hpp"

namespace qklab {

namespace {

using Clock = std::chrono::steady_clock;

enum class StudyKind { plain, noise, precision };

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t fnv1a(std::uint64_t hash, const void* data, std::size_t size) {
    constexpr std::uint64_t kPrime = 0x100000001b3ull;
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        hash ^= bytes[i];
        hash *= kPrime;
    }
    return hash;
}

struct PreparedData {
    Dataset train;
    Dataset test;
    Eigen::MatrixXd joint_X; // train rows then test rows
};

PreparedData prepare(const Dataset& pool, const ExperimentConfig& config,
                     int dim) {
    PreprocessOptions options;
    options.target_dimension = dim;
    options.restandardize = config.restandardize;
    options.pca_on_pool = config.pca_on_pool;
    PreparedData data;
    std::tie(data.train, data.test) = preprocess_and_split(
        pool, options, config.n_train, config.n_test, config.data_seed);
    data.joint_X.resize(data.train.X.rows() + data.test.X.rows(),
                        data.train.X.cols());
    data.joint_X.topRows(data.train.X.rows()) = data.train.X;
    data.joint_X.bottomRows(data.test.X.rows()) = data.test.X;
    return data;
}

std::unique_ptr<FeatureMap> make_map(const ExperimentConfig& config, int dim,
                                     double scaling, std::uint64_t haar_seed) {
    if (config.feature_map == "iqp") {
        return std::make_unique<IqpFeatureMap>(dim, scaling,
                                               config.max_qubits);
    }
    if (config.feature_map == "hamevo") {
        return std::make_unique<HamEvoFeatureMap>(dim, scaling,
                                                  config.trotter_steps,
                                                  haar_seed,
                                                  config.max_qubits);
    }
    throw InputError("make_map: no quantum map named " + config.feature_map);
}

std::uint64_t cell_seed(const ExperimentConfig& config, int dim,
                        double scaling, std::uint64_t haar_seed) {
    const std::uint64_t a = mix64(config.master_seed,
                                  static_cast<std::uint64_t>(dim));
    const std::uint64_t b = mix64(a, std::bit_cast<std::uint64_t>(scaling));
    return mix64(b, haar_seed);
}

/// Everything the exact (noise-free) path of one cell produces. Reused
/// across Haar seeds for seed-independent maps.
struct ExactCell {
    std::string status = "ok";
    Eigen::MatrixXd joint; // retained for noise injection
    std::uint64_t checksum_train = 0;
    std::uint64_t checksum_cross = 0;
    double c_selected = 0.0;
    double train_bacc = 0.0;
    double test_bacc = 0.0;
    double median = 0.0;
    double offstd = 0.0;
    int n_sv = 0;
    double wall_s = 0.0;
};

struct EvalResult {
    double c_selected = 0.0;
    double train_bacc = 0.0;
    double test_bacc = 0.0;
    int n_sv = 0;
};

/// Penalty selection, final training, and both accuracies on sliced
/// train/cross kernels.
EvalResult select_and_score(const Eigen::MatrixXd& K_train,
                            const Eigen::MatrixXd& K_cross,
                            const std::vector<int>& y_train,
                            const std::vector<int>& y_test,
                            const ExperimentConfig& config,
                            std::span<const double> c_grid,
                            std::uint64_t cv_seed) {
    LabeledKernelProblem problem{K_train, y_train};
    const SvcOptions svc_options;
    CSelection selection =
        config.c_selection == "cv"
            ? select_c_by_cv(problem, c_grid, config.cv_folds, cv_seed,
                             svc_options, config.threads)
            : select_c_by_train_score(problem, c_grid, svc_options,
                                      config.threads);
    EvalResult result;
    result.c_selected = selection.C;
    result.n_sv = static_cast<int>(selection.model.support_indices.size());
    const auto f_train = decision_values(selection.model, y_train, K_train);
    result.train_bacc = balanced_accuracy(predict_labels(f_train), y_train);
    const auto f_test = decision_values(selection.model, y_train, K_cross);
    result.test_bacc = balanced_accuracy(predict_labels(f_test), y_test);
    return result;
}

std::string decimals_text(int decimals) {
    return decimals == -1 ? std::string("full") : std::to_string(decimals);
}

std::string cell_key(const ResultRow& row) {
    std::string key = "q" + std::to_string(row.n_qubits) + "-s" +
                      format_double(row.scaling_factor) + "-h" +
                      std::to_string(row.haar_seed) + "-d" +
                      decimals_text(row.decimals);
    key += std::isnan(row.noise_sigma) || row.noise_sigma > 0.0 ? "-noisy"
                                                                : "-exact";
    return key;
}

/// Computes one cell's exact path: Gram over train+test jointly, slices,
/// penalty selection, accuracies. Capacity problems become a skipped
/// status instead of aborting the sweep.
ExactCell compute_exact_cell(const ExperimentConfig& config,
                             const PreparedData& data, int dim,
                             double scaling, std::uint64_t haar_seed,
                             int decimals, std::span<const double> c_grid,
                             std::uint64_t cv_seed,
                             const GramOptions& gram_options) {
    ExactCell cell;
    const auto start = Clock::now();
    try {
        const auto n_train = data.train.X.rows();
        const auto n_test = data.test.X.rows();
        if (config.feature_map == "rbf") {
            cell.joint = rbf_gram(data.joint_X, scaling);
        } else if (decimals == -1) {
            const auto map = make_map(config, dim, scaling, haar_seed);
            cell.joint = gram(*map, data.joint_X, gram_options);
        } else {
            // Rounding applies to the circuit angles, which are the
            // bandwidth-scaled inputs; the map then runs at unit scale.
            const Eigen::MatrixXd rounded =
                round_inputs(scaling * data.joint_X, decimals);
            const auto map = make_map(config, dim, 1.0, haar_seed);
            cell.joint = gram(*map, rounded, gram_options);
        }
        const Eigen::MatrixXd K_train =
            cell.joint.topLeftCorner(n_train, n_train);
        const Eigen::MatrixXd K_cross =
            cell.joint.bottomLeftCorner(n_test, n_train);
        cell.checksum_train = gram_checksum(K_train);
        cell.checksum_cross = gram_checksum(K_cross);
        const EvalResult eval =
            select_and_score(K_train, K_cross, data.train.y, data.test.y,
                             config, c_grid, cv_seed);
        cell.c_selected = eval.c_selected;
        cell.train_bacc = eval.train_bacc;
        cell.test_bacc = eval.test_bacc;
        cell.n_sv = eval.n_sv;
        cell.median = median_offdiag(K_train);
        cell.offstd = offdiag_stddev(K_train);
    } catch (const CapacityError&) {
        cell.status = "skipped-capacity";
        cell.joint.resize(0, 0);
    }
    cell.wall_s = seconds_since(start);
    return cell;
}

ResultRow base_row(const ExperimentConfig& config, const PreparedData& data,
                   int dim, double scaling, std::uint64_t haar_seed) {
    ResultRow row;
    row.dataset = data.train.name;
    row.feature_map = config.feature_map;
    if (config.feature_map == "iqp") {
        row.n_qubits = dim;
        row.trotter_steps = 0;
    } else if (config.feature_map == "hamevo") {
        row.n_qubits = dim + 1;
        row.trotter_steps = config.trotter_steps;
    } else {
        row.n_qubits = 0;
        row.trotter_steps = 0;
    }
    row.scaling_factor = scaling;
    row.haar_seed = haar_seed;
    return row;
}

void fill_from_cell(ResultRow& row, const ExactCell& cell) {
    row.status = cell.status;
    if (cell.status != "ok") {
        return;
    }
    row.c_selected = cell.c_selected;
    row.train_bacc = cell.train_bacc;
    row.test_bacc = cell.test_bacc;
    row.median_offdiag = cell.median;
    row.offdiag_std = cell.offstd;
    row.n_support_vectors = cell.n_sv;
}

void maybe_save_gram(const ExperimentConfig& config, const ResultRow& row,
                     const Eigen::MatrixXd& joint, Eigen::Index n_train,
                     Eigen::Index n_test) {
    if (!config.save_grams || row.status != "ok") {
        return;
    }
    const std::filesystem::path dir =
        std::filesystem::path(config.out_dir) / "grams";
    std::filesystem::create_directories(dir);
    const std::string key = cell_key(row);
    save_gram_binary(joint.topLeftCorner(n_train, n_train),
                     dir / (key + "-train.bin"));
    save_gram_csv(joint.bottomLeftCorner(n_test, n_train),
                  dir / (key + "-cross.csv"));
}

int decimals_sort_key(int decimals) {
    return decimals == -1 ? std::numeric_limits<int>::max() : decimals;
}

int noise_sort_key(const ResultRow& row) {
    if (std::isnan(row.noise_sigma)) {
        return 1;
    }
    return row.noise_sigma > 0.0 ? 1 : 0;
}

void sort_rows(std::vector<ResultRow>& rows) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const ResultRow& a, const ResultRow& b) {
                         const auto key = [](const ResultRow& r) {
                             return std::make_tuple(
                                 r.n_qubits, r.scaling_factor, r.haar_seed,
                                 decimals_sort_key(r.decimals),
                                 noise_sort_key(r));
                         };
                         return key(a) < key(b);
                     });
}

RunReport run_engine(const ExperimentConfig& config, StudyKind kind) {
    validate_config(config);
    if (config.feature_map == "rbf" && kind != StudyKind::plain) {
        throw ConfigError("noise and precision studies need a quantum "
                          "feature map, not rbf");
    }

    const Dataset pool = load_pool(config);
    RunReport report;
    report.input_checksum = dataset_checksum(pool);

    const std::vector<double> c_grid =
        config.c_grid.empty() ? default_c_grid() : config.c_grid;
    const std::uint64_t cv_seed = mix64(config.master_seed, 0x6376ull);
    GramOptions gram_options;
    gram_options.n_threads = config.threads;

    const auto run_start = Clock::now();
    // Rolling estimate of one cell's Gram cost, fed by the last cell.
    double last_cell_seconds = 0.0;
    const auto over_budget = [&]() {
        if (config.budget_seconds <= 0.0) {
            return false;
        }
        return seconds_since(run_start) + last_cell_seconds >
               config.budget_seconds;
    };

    const std::vector<int> decimals_grid =
        kind == StudyKind::precision ? config.decimals : std::vector<int>{-1};
    const bool seed_sensitive = config.feature_map == "hamevo";

    for (const int dim : config.dimensions) {
        const PreparedData data = prepare(pool, config, dim);
        const auto n_train = data.train.X.rows();
        const auto n_test = data.test.X.rows();
        for (const double scaling : config.scalings) {
            // Exact cells keyed by decimals; seed-insensitive maps reuse
            // them across Haar seeds.
            std::map<int, ExactCell> memo;
            for (const std::uint64_t haar_seed : config.haar_seeds) {
                if (seed_sensitive) {
                    memo.clear();
                }
                for (const int decimals : decimals_grid) {
                    ResultRow row = base_row(config, data, dim, scaling,
                                             haar_seed);
                    row.decimals = decimals;

                    auto it = memo.find(decimals);
                    if (it == memo.end()) {
                        if (over_budget()) {
                            ExactCell skipped;
                            skipped.status = "skipped-budget";
                            it = memo.emplace(decimals, std::move(skipped))
                                     .first;
                        } else {
                            ExactCell cell = compute_exact_cell(
                                config, data, dim, scaling, haar_seed,
                                decimals, c_grid, cv_seed, gram_options);
                            if (cell.status == "ok") {
                                last_cell_seconds = cell.wall_s;
                            }
                            it = memo.emplace(decimals, std::move(cell)).first;
                        }
                        row.wall_time_s = it->second.wall_s;
                    }
                    const ExactCell& cell = it->second;
                    fill_from_cell(row, cell);
                    if (cell.status == "ok") {
                        report.checksums.push_back({cell_key(row),
                                                    cell.checksum_train,
                                                    cell.checksum_cross});
                        maybe_save_gram(config, row, cell.joint, n_train,
                                        n_test);
                    }
                    report.rows.push_back(row);

                    if (kind != StudyKind::noise) {
                        continue;
                    }
                    // Shot-noise companion row: estimate sigma from a
                    // probe block, perturb the joint Gram, repair, rescore.
                    ResultRow noisy = row;
                    noisy.wall_time_s = 0.0;
                    if (cell.status != "ok") {
                        noisy.noise_sigma =
                            std::numeric_limits<double>::quiet_NaN();
                        report.rows.push_back(noisy);
                        continue;
                    }
                    const auto noise_start = Clock::now();
                    const std::uint64_t seed =
                        cell_seed(config, dim, scaling, haar_seed);
                    ShotNoiseConfig shot;
                    shot.shots = config.noise_shots;
                    shot.probe_size = config.noise_probe;
                    shot.repeats = config.noise_repeats;
                    shot.rng_seed = seed;
                    shot.random_probe = config.noise_random_probe;
                    const auto map =
                        make_map(config, dim, scaling, haar_seed);
                    const double sigma = estimate_shot_sigma(
                        *map, data.train.X, shot, gram_options);
                    noisy.noise_sigma = sigma;
                    Eigen::MatrixXd joint = cell.joint;
                    if (sigma > 0.0) {
                        joint = nearest_psd(inject_noise(joint, sigma, seed));
                    }
                    const Eigen::MatrixXd K_train =
                        joint.topLeftCorner(n_train, n_train);
                    const Eigen::MatrixXd K_cross =
                        joint.bottomLeftCorner(n_test, n_train);
                    const EvalResult eval = select_and_score(
                        K_train, K_cross, data.train.y, data.test.y, config,
                        c_grid, cv_seed);
                    noisy.c_selected = eval.c_selected;
                    noisy.train_bacc = eval.train_bacc;
                    noisy.test_bacc = eval.test_bacc;
                    noisy.n_support_vectors = eval.n_sv;
                    noisy.median_offdiag = median_offdiag(K_train);
                    noisy.offdiag_std = offdiag_stddev(K_train);
                    noisy.wall_time_s = seconds_since(noise_start);
                    report.checksums.push_back({cell_key(noisy),
                                                gram_checksum(K_train),
                                                gram_checksum(K_cross)});
                    report.rows.push_back(noisy);
                }
            }
        }
    }

    sort_rows(report.rows);
    std::sort(report.checksums.begin(), report.checksums.end(),
              [](const GramChecksumRow& a, const GramChecksumRow& b) {
                  return a.cell < b.cell;
              });
    for (const auto& row : report.rows) {
        if (row.status != "ok") {
            ++report.n_skipped;
        }
    }
    return report;
}

std::string csv_escape(const std::string& value) {
    // Values never contain commas by construction; guard anyway.
    if (value.find(',') == std::string::npos) {
        return value;
    }
    return '"' + value + '"';
}

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

} // namespace

const char* qklab_version() { return "0.1.0"; }

std::uint64_t dataset_checksum(const Dataset& ds) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (Eigen::Index i = 0; i < ds.X.rows(); ++i) {
        for (Eigen::Index j = 0; j < ds.X.cols(); ++j) {
            const double v = ds.X(i, j);
            hash = fnv1a(hash, &v, sizeof(v));
        }
    }
    for (const int label : ds.y) {
        const std::int32_t v = label;
        hash = fnv1a(hash, &v, sizeof(v));
    }
    hash = fnv1a(hash, ds.name.data(), ds.name.size());
    return hash;
}

Dataset load_pool(const ExperimentConfig& config) {
    if (config.dataset == "synthetic") {
        return synthetic_two_class(config.synthetic_n, config.synthetic_dim,
                                   config.synthetic_separation,
                                   config.data_seed);
    }
    if (config.dataset == "idx") {
        return load_idx(config.idx_images, config.idx_labels, config.class_a,
                        config.class_b);
    }
    if (config.dataset == "csv") {
        return load_csv(config.csv_path, config.label_column);
    }
    if (config.dataset == "cache") {
        return load_cache(config.cache_path);
    }
    throw ConfigError("unknown dataset kind: " + config.dataset);
}

RunReport run_bandwidth_sweep(const ExperimentConfig& config) {
    return run_engine(config, StudyKind::plain);
}

RunReport run_qubit_sweep(const ExperimentConfig& config) {
    return run_engine(config, StudyKind::plain);
}

RunReport run_noise_study(const ExperimentConfig& config) {
    return run_engine(config, StudyKind::noise);
}

RunReport run_precision_study(const ExperimentConfig& config) {
    return run_engine(config, StudyKind::precision);
}

std::string results_csv_header() {
    return "dataset,feature_map,n_qubits,scaling_factor,trotter_steps,"
           "haar_seed,c_selected,train_bacc,test_bacc,median_offdiag,"
           "offdiag_std,n_support_vectors,noise_sigma,decimals,status";
}

std::string results_csv_line(const ResultRow& row) {
    std::string line = csv_escape(row.dataset);
    line += ',';
    line += row.feature_map;
    line += ',';
    line += std::to_string(row.n_qubits);
    line += ',';
    line += format_double(row.scaling_factor);
    line += ',';
    line += std::to_string(row.trotter_steps);
    line += ',';
    line += std::to_string(row.haar_seed);
    line += ',';
    if (row.status == "ok") {
        line += format_double(row.c_selected);
        line += ',';
        line += format_double(row.train_bacc);
        line += ',';
        line += format_double(row.test_bacc);
        line += ',';
        line += format_double(row.median_offdiag);
        line += ',';
        line += format_double(row.offdiag_std);
        line += ',';
        line += std::to_string(row.n_support_vectors);
        line += ',';
    } else {
        line += ",,,,,,";
    }
    if (!std::isnan(row.noise_sigma) && (row.status == "ok" ||
                                         row.noise_sigma == 0.0)) {
        line += format_double(row.noise_sigma);
    }
    line += ',';
    line += decimals_text(row.decimals);
    line += ',';
    line += row.status;
    return line;
}

void emit_outputs(const RunReport& report, const ExperimentConfig& config,
                  const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);

    {
        std::ofstream out(out_dir / "results.csv", std::ios::trunc);
        if (!out) {
            throw FormatError("cannot write results.csv in " +
                              out_dir.string());
        }
        out << results_csv_header() << '\n';
        for (const auto& row : report.rows) {
            out << results_csv_line(row) << '\n';
        }
    }
    {
        nlohmann::ordered_json manifest;
        manifest["qklab_version"] = qklab_version();
        manifest["experiment"] = config.experiment;
        manifest["input_checksum"] = hex64(report.input_checksum);
        manifest["n_rows"] = report.rows.size();
        manifest["n_skipped"] = report.n_skipped;
        nlohmann::ordered_json kv;
        for (const auto& [key, value] : config_key_values(config)) {
            kv[key] = value;
        }
        manifest["config"] = std::move(kv);
        std::ofstream out(out_dir / "manifest.json", std::ios::trunc);
        if (!out) {
            throw FormatError("cannot write manifest.json in " +
                              out_dir.string());
        }
        out << manifest.dump(2) << '\n';
    }
    {
        std::ofstream out(out_dir / "checksums.csv", std::ios::trunc);
        if (!out) {
            throw FormatError("cannot write checksums.csv in " +
                              out_dir.string());
        }
        out << "cell,gram_train,gram_cross\n";
        for (const auto& row : report.checksums) {
            out << row.cell << ',' << hex64(row.train) << ','
                << hex64(row.cross) << '\n';
        }
    }
    {
        // Wall times live in their own file so results.csv stays
        // byte-identical between reruns.
        std::ofstream out(out_dir / "timings.csv", std::ios::trunc);
        if (!out) {
            throw FormatError("cannot write timings.csv in " +
                              out_dir.string());
        }
        out << "cell,wall_time_s\n";
        out.precision(6);
        for (const auto& row : report.rows) {
            out << cell_key(row) << ',' << std::fixed << row.wall_time_s
                << '\n';
        }
    }
}

} // namespace qklab
