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

#include "qklab/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "qklab/errors.hpp"
#include "qklab/parallel.hpp"
#include "qklab/rng.hpp"

namespace qklab {

namespace {

constexpr std::uint64_t kGramMagic = 0x4d415247424c4b51ull; // "QKLBGRAM"
constexpr std::uint32_t kGramVersion = 1;

std::vector<double> row_vector(const Eigen::MatrixXd& X, Eigen::Index i) {
    std::vector<double> row(static_cast<std::size_t>(X.cols()));
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        row[static_cast<std::size_t>(j)] = X(i, j);
    }
    return row;
}

void check_feature_width(const FeatureMap& map, const Eigen::MatrixXd& X,
                         const char* what) {
    if (X.cols() != map.dimension()) {
        throw InputError(std::string(what) + ": feature width " +
                         std::to_string(X.cols()) + " does not match map " +
                         "dimension " + std::to_string(map.dimension()));
    }
    if (X.rows() == 0) {
        throw InputError(std::string(what) + ": empty input");
    }
}

void check_cache_budget(const FeatureMap& map, Eigen::Index n_states,
                        const GramOptions& options) {
    const std::uint64_t per_state = (1ull << map.qubit_count()) *
                                    sizeof(Complex);
    const std::uint64_t need = per_state * static_cast<std::uint64_t>(n_states);
    if (need > options.memory_budget_bytes) {
        throw CapacityError(
            "statevector cache needs " + std::to_string(need) +
            " bytes for " + std::to_string(n_states) + " states of " +
            std::to_string(map.qubit_count()) +
            " qubits, over the budget of " +
            std::to_string(options.memory_budget_bytes) +
            "; reduce the number of points or qubits, or raise the budget");
    }
}

std::vector<StateVector> embed_rows(const FeatureMap& map,
                                    const Eigen::MatrixXd& X,
                                    const GramOptions& options) {
    std::vector<StateVector> states;
    states.reserve(static_cast<std::size_t>(X.rows()));
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        states.push_back(StateVector::zero_state(map.qubit_count()));
    }
    parallel_for(static_cast<std::size_t>(X.rows()), options.n_threads,
                 [&](std::size_t i) {
                     const auto row =
                         row_vector(X, static_cast<Eigen::Index>(i));
                     states[i] = map.embed(row);
                 });
    return states;
}

double squared_distance(const Eigen::MatrixXd& A, Eigen::Index i,
                        const Eigen::MatrixXd& B, Eigen::Index j) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < A.cols(); ++k) {
        const double diff = A(i, k) - B(j, k);
        acc += diff * diff;
    }
    return acc;
}

std::vector<double> strict_upper_entries(const Eigen::MatrixXd& K) {
    if (K.rows() != K.cols()) {
        throw InputError("offdiagonal statistics need a square matrix");
    }
    if (K.rows() < 2) {
        throw InputError("offdiagonal statistics need n >= 2");
    }
    std::vector<double> entries;
    entries.reserve(static_cast<std::size_t>(K.rows() * (K.rows() - 1) / 2));
    for (Eigen::Index i = 0; i < K.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < K.cols(); ++j) {
            entries.push_back(K(i, j));
        }
    }
    return entries;
}

void write_u64(std::ofstream& out, std::uint64_t v) {
    // Little-endian on every supported target.
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::ifstream& in, const std::filesystem::path& path) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) {
        throw FormatError("truncated gram file: " + path.string());
    }
    return v;
}

} // namespace

Eigen::MatrixXd gram(const FeatureMap& map, const Eigen::MatrixXd& X,
                     const GramOptions& options) {
    check_feature_width(map, X, "gram");
    check_cache_budget(map, X.rows(), options);
    const auto states = embed_rows(map, X, options);
    const Eigen::Index n = X.rows();

    Eigen::MatrixXd K(n, n);
    // One worker owns one row of the upper triangle; no entry is written
    // twice, so the result is thread-count independent.
    parallel_for(static_cast<std::size_t>(n), options.n_threads,
                 [&](std::size_t i) {
                     const auto ei = static_cast<Eigen::Index>(i);
                     K(ei, ei) = 1.0;
                     for (Eigen::Index j = ei + 1; j < n; ++j) {
                         K(ei, j) = fidelity(
                             states[i], states[static_cast<std::size_t>(j)]);
                     }
                 });
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            K(j, i) = K(i, j);
        }
    }
    return K;
}

Eigen::MatrixXd cross_gram(const FeatureMap& map, const Eigen::MatrixXd& X_test,
                           const Eigen::MatrixXd& X_train,
                           const GramOptions& options) {
    check_feature_width(map, X_test, "cross_gram");
    check_feature_width(map, X_train, "cross_gram");
    check_cache_budget(map, X_test.rows() + X_train.rows(), options);
    const auto test_states = embed_rows(map, X_test, options);
    const auto train_states = embed_rows(map, X_train, options);

    Eigen::MatrixXd K(X_test.rows(), X_train.rows());
    parallel_for(static_cast<std::size_t>(X_test.rows()), options.n_threads,
                 [&](std::size_t i) {
                     for (Eigen::Index j = 0; j < X_train.rows(); ++j) {
                         K(static_cast<Eigen::Index>(i), j) = fidelity(
                             test_states[i],
                             train_states[static_cast<std::size_t>(j)]);
                     }
                 });
    return K;
}

Eigen::MatrixXd rbf_gram(const Eigen::MatrixXd& X, double gamma) {
    if (!(gamma > 0.0)) {
        throw InputError("rbf_gram: gamma must be positive, got " +
                         std::to_string(gamma));
    }
    if (X.rows() == 0) {
        throw InputError("rbf_gram: empty input");
    }
    const Eigen::Index n = X.rows();
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        K(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = std::exp(-gamma * squared_distance(X, i, X, j));
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    return K;
}

Eigen::MatrixXd rbf_cross_gram(const Eigen::MatrixXd& X_test,
                               const Eigen::MatrixXd& X_train, double gamma) {
    if (!(gamma > 0.0)) {
        throw InputError("rbf_cross_gram: gamma must be positive, got " +
                         std::to_string(gamma));
    }
    if (X_test.cols() != X_train.cols()) {
        throw InputError("rbf_cross_gram: feature widths differ");
    }
    Eigen::MatrixXd K(X_test.rows(), X_train.rows());
    for (Eigen::Index i = 0; i < X_test.rows(); ++i) {
        for (Eigen::Index j = 0; j < X_train.rows(); ++j) {
            K(i, j) =
                std::exp(-gamma * squared_distance(X_test, i, X_train, j));
        }
    }
    return K;
}

double shot_sigma_from_probs(const Eigen::MatrixXd& probs, int shots,
                             int repeats, Rng& rng) {
    if (probs.rows() != probs.cols() || probs.rows() < 2) {
        throw InputError("shot_sigma_from_probs: need a square probe, n >= 2");
    }
    if (shots <= 0 || repeats < 2) {
        throw InputError("shot_sigma_from_probs: need shots > 0, repeats >= 2");
    }
    double sum_std = 0.0;
    std::size_t n_entries = 0;
    std::vector<double> estimates(static_cast<std::size_t>(repeats));
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < probs.cols(); ++j) {
            const double p = std::clamp(probs(i, j), 0.0, 1.0);
            double mean = 0.0;
            for (int r = 0; r < repeats; ++r) {
                const double est =
                    static_cast<double>(rng.binomial(shots, p)) / shots;
                estimates[static_cast<std::size_t>(r)] = est;
                mean += est;
            }
            mean /= repeats;
            double var = 0.0;
            for (const double est : estimates) {
                var += (est - mean) * (est - mean);
            }
            var /= (repeats - 1);
            sum_std += std::sqrt(var);
            ++n_entries;
        }
    }
    return sum_std / static_cast<double>(n_entries);
}

double estimate_shot_sigma(const FeatureMap& map, const Eigen::MatrixXd& X,
                           const ShotNoiseConfig& config,
                           const GramOptions& options) {
    if (config.probe_size < 2) {
        throw InputError("estimate_shot_sigma: probe_size must be >= 2");
    }
    if (X.rows() < config.probe_size) {
        throw InputError("estimate_shot_sigma: probe_size " +
                         std::to_string(config.probe_size) + " exceeds " +
                         std::to_string(X.rows()) + " rows");
    }
    Rng rng = Rng::keyed(config.rng_seed, 0x70726f6265ull); // "probe"
    Eigen::MatrixXd probe(config.probe_size, X.cols());
    if (config.random_probe) {
        std::vector<std::size_t> idx(static_cast<std::size_t>(X.rows()));
        for (std::size_t i = 0; i < idx.size(); ++i) {
            idx[i] = i;
        }
        rng.shuffle(idx.begin(), idx.end());
        for (int i = 0; i < config.probe_size; ++i) {
            probe.row(i) =
                X.row(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]));
        }
    } else {
        probe = X.topRows(config.probe_size);
    }
    const Eigen::MatrixXd exact = gram(map, probe, options);
    return shot_sigma_from_probs(exact, config.shots, config.repeats, rng);
}

Eigen::MatrixXd inject_noise(const Eigen::MatrixXd& K, double sigma,
                             std::uint64_t rng_seed) {
    if (K.rows() != K.cols()) {
        throw InputError("inject_noise: need a square matrix");
    }
    if (sigma < 0.0) {
        throw InputError("inject_noise: sigma must be non-negative");
    }
    if (sigma == 0.0) {
        return K;
    }
    Rng rng = Rng::keyed(rng_seed, 0x6e6f697365ull); // "noise"
    Eigen::MatrixXd noisy = K;
    for (Eigen::Index i = 0; i < K.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < K.cols(); ++j) {
            const double delta = sigma * rng.normal();
            noisy(i, j) += delta;
            noisy(j, i) = noisy(i, j);
        }
    }
    return noisy;
}

Eigen::MatrixXd nearest_psd(const Eigen::MatrixXd& K) {
    if (K.rows() != K.cols()) {
        throw InputError("nearest_psd: need a square matrix");
    }
    // Symmetrize first so tiny asymmetries cannot poison the solver.
    const Eigen::MatrixXd sym = 0.5 * (K + K.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    if (solver.info() != Eigen::Success) {
        throw NumericError("nearest_psd: eigendecomposition failed");
    }
    Eigen::VectorXd clipped = solver.eigenvalues().cwiseMax(0.0);
    Eigen::MatrixXd out = solver.eigenvectors() * clipped.asDiagonal() *
                          solver.eigenvectors().transpose();
    // The reconstruction is symmetric up to rounding; make it exact so the
    // output satisfies the same contract as a fresh Gram matrix.
    out = 0.5 * (out + out.transpose());
    return out;
}

Eigen::MatrixXd round_inputs(const Eigen::MatrixXd& X, int decimals) {
    if (decimals < 0) {
        throw InputError("round_inputs: decimals must be non-negative");
    }
    const double scale = std::pow(10.0, decimals);
    Eigen::MatrixXd out(X.rows(), X.cols());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            // std::round ties away from zero, matching the stated contract.
            out(i, j) = std::round(X(i, j) * scale) / scale;
        }
    }
    return out;
}

double median_offdiag(const Eigen::MatrixXd& K) {
    auto entries = strict_upper_entries(K);
    const std::size_t mid = entries.size() / 2;
    std::nth_element(entries.begin(), entries.begin() + mid, entries.end());
    const double upper = entries[mid];
    if (entries.size() % 2 == 1) {
        return upper;
    }
    const double lower =
        *std::max_element(entries.begin(), entries.begin() + mid);
    return 0.5 * (lower + upper);
}

double offdiag_stddev(const Eigen::MatrixXd& K) {
    const auto entries = strict_upper_entries(K);
    double mean = 0.0;
    for (const double v : entries) {
        mean += v;
    }
    mean /= static_cast<double>(entries.size());
    double var = 0.0;
    for (const double v : entries) {
        var += (v - mean) * (v - mean);
    }
    var /= static_cast<double>(entries.size());
    return std::sqrt(var);
}

void save_gram_binary(const Eigen::MatrixXd& K,
                      const std::filesystem::path& path) {
    if (K.rows() != K.cols()) {
        throw InputError("save_gram_binary: need a square matrix");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw FormatError("cannot open for writing: " + path.string());
    }
    write_u64(out, kGramMagic);
    write_u64(out, kGramVersion);
    write_u64(out, static_cast<std::uint64_t>(K.rows()));
    for (Eigen::Index i = 0; i < K.rows(); ++i) {
        for (Eigen::Index j = i; j < K.cols(); ++j) {
            const double v = K(i, j);
            out.write(reinterpret_cast<const char*>(&v), sizeof(v));
        }
    }
    if (!out) {
        throw FormatError("write failed: " + path.string());
    }
}

Eigen::MatrixXd load_gram_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open: " + path.string());
    }
    if (read_u64(in, path) != kGramMagic) {
        throw FormatError("not a gram file: " + path.string());
    }
    const std::uint64_t version = read_u64(in, path);
    if (version != kGramVersion) {
        throw FormatError("unsupported gram file version " +
                          std::to_string(version) + ": " + path.string());
    }
    const std::uint64_t n = read_u64(in, path);
    if (n == 0 || n > (1ull << 20)) {
        throw FormatError("implausible gram size " + std::to_string(n) + ": " +
                          path.string());
    }
    Eigen::MatrixXd K(static_cast<Eigen::Index>(n),
                      static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < K.rows(); ++i) {
        for (Eigen::Index j = i; j < K.cols(); ++j) {
            double v = 0.0;
            in.read(reinterpret_cast<char*>(&v), sizeof(v));
            if (!in) {
                throw FormatError("truncated gram file: " + path.string());
            }
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    return K;
}

void save_gram_csv(const Eigen::MatrixXd& K,
                   const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw FormatError("cannot open for writing: " + path.string());
    }
    std::ostringstream line;
    line.precision(17);
    for (Eigen::Index i = 0; i < K.rows(); ++i) {
        line.str("");
        for (Eigen::Index j = 0; j < K.cols(); ++j) {
            if (j > 0) {
                line << ',';
            }
            line << K(i, j);
        }
        line << '\n';
        out << line.str();
    }
    if (!out) {
        throw FormatError("write failed: " + path.string());
    }
}

std::uint64_t gram_checksum(const Eigen::MatrixXd& K) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    constexpr std::uint64_t kPrime = 0x100000001b3ull;
    for (Eigen::Index i = 0; i < K.rows(); ++i) {
        for (Eigen::Index j = 0; j < K.cols(); ++j) {
            const double v = K(i, j);
            unsigned char bytes[sizeof(double)];
            std::memcpy(bytes, &v, sizeof(double));
            for (const unsigned char b : bytes) {
                hash ^= b;
                hash *= kPrime;
            }
        }
    }
    return hash;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw InputError("linear_fit: size mismatch");
    }
    if (x.size() < 2) {
        throw InputError("linear_fit: need at least two points");
    }
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) {
        throw InputError("linear_fit: x values are all identical");
    }
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (syy == 0.0) {
        fit.r2 = 1.0; // Horizontal data is fit exactly by the mean line.
    } else {
        fit.r2 = (sxy * sxy) / (sxx * syy);
    }
    return fit;
}

} // namespace qklab
