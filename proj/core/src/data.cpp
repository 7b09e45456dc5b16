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

#include "qklab/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "qklab/errors.hpp"
#include "qklab/rng.hpp"

namespace qklab {

namespace {

constexpr std::uint32_t kIdxImageMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelMagic = 0x00000801;
constexpr std::uint64_t kCacheMagic = 0x41544144424c4b51ull; // "QKLBDATA"
constexpr std::uint32_t kCacheVersion = 1;

std::uint32_t read_u32_be(std::ifstream& in, const std::filesystem::path& path,
                          std::uint64_t offset) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    if (!in) {
        throw FormatError("truncated IDX file at byte " +
                          std::to_string(offset) + ": " + path.string());
    }
    return (static_cast<std::uint32_t>(bytes[0]) << 24) |
           (static_cast<std::uint32_t>(bytes[1]) << 16) |
           (static_cast<std::uint32_t>(bytes[2]) << 8) |
           static_cast<std::uint32_t>(bytes[3]);
}

void check_finite(const Eigen::MatrixXd& X, const std::string& what) {
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            if (!std::isfinite(X(i, j))) {
                throw FormatError(what + ": non-finite value at row " +
                                  std::to_string(i) + ", column " +
                                  std::to_string(j));
            }
        }
    }
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream stream(line);
    while (std::getline(stream, cell, ',')) {
        // Tolerate surrounding whitespace and trailing carriage returns.
        const auto first = cell.find_first_not_of(" \t\r");
        const auto last = cell.find_last_not_of(" \t\r");
        cells.push_back(first == std::string::npos
                            ? std::string()
                            : cell.substr(first, last - first + 1));
    }
    if (!line.empty() && line.back() == ',') {
        cells.emplace_back();
    }
    return cells;
}

double parse_cell(const std::string& cell, std::size_t line_no,
                  const std::filesystem::path& path) {
    std::size_t consumed = 0;
    double value = 0.0;
    try {
        value = std::stod(cell, &consumed);
    } catch (const std::exception&) {
        throw FormatError("non-numeric cell '" + cell + "' at line " +
                          std::to_string(line_no) + ": " + path.string());
    }
    if (consumed != cell.size()) {
        throw FormatError("non-numeric cell '" + cell + "' at line " +
                          std::to_string(line_no) + ": " + path.string());
    }
    if (!std::isfinite(value)) {
        throw FormatError("non-finite value at line " +
                          std::to_string(line_no) + ": " + path.string());
    }
    return value;
}

void write_bytes(std::ofstream& out, const void* data, std::size_t size) {
    out.write(reinterpret_cast<const char*>(data), size);
}

void read_bytes(std::ifstream& in, void* data, std::size_t size,
                const std::filesystem::path& path) {
    in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(size));
    if (!in) {
        throw FormatError("truncated cache file: " + path.string());
    }
}

} // namespace

Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path, int class_a,
                 int class_b) {
    if (class_a == class_b) {
        throw InputError("load_idx: the two classes must differ");
    }
    std::ifstream images(images_path, std::ios::binary);
    if (!images) {
        throw FormatError("cannot open: " + images_path.string());
    }
    const std::uint32_t image_magic = read_u32_be(images, images_path, 0);
    if (image_magic != kIdxImageMagic) {
        throw FormatError("bad IDX image magic at byte 0: " +
                          images_path.string());
    }
    const std::uint32_t n_images = read_u32_be(images, images_path, 4);
    const std::uint32_t n_rows = read_u32_be(images, images_path, 8);
    const std::uint32_t n_cols = read_u32_be(images, images_path, 12);

    std::ifstream labels(labels_path, std::ios::binary);
    if (!labels) {
        throw FormatError("cannot open: " + labels_path.string());
    }
    const std::uint32_t label_magic = read_u32_be(labels, labels_path, 0);
    if (label_magic != kIdxLabelMagic) {
        throw FormatError("bad IDX label magic at byte 0: " +
                          labels_path.string());
    }
    const std::uint32_t n_labels = read_u32_be(labels, labels_path, 4);
    if (n_labels != n_images) {
        throw FormatError("IDX count mismatch: " + std::to_string(n_images) +
                          " images vs " + std::to_string(n_labels) +
                          " labels");
    }

    const std::size_t pixels = static_cast<std::size_t>(n_rows) * n_cols;
    std::vector<unsigned char> label_bytes(n_labels);
    labels.read(reinterpret_cast<char*>(label_bytes.data()),
                static_cast<std::streamsize>(n_labels));
    if (!labels) {
        throw FormatError("truncated IDX file at byte 8: " +
                          labels_path.string());
    }

    std::vector<std::uint32_t> keep;
    for (std::uint32_t i = 0; i < n_labels; ++i) {
        if (label_bytes[i] == class_a || label_bytes[i] == class_b) {
            keep.push_back(i);
        }
    }
    bool has_a = false;
    bool has_b = false;
    for (const std::uint32_t i : keep) {
        has_a = has_a || label_bytes[i] == class_a;
        has_b = has_b || label_bytes[i] == class_b;
    }
    if (!has_a || !has_b) {
        throw InputError("load_idx: class " +
                         std::to_string(has_a ? class_b : class_a) +
                         " has no rows in " + labels_path.string());
    }

    Dataset ds;
    ds.X.resize(static_cast<Eigen::Index>(keep.size()),
                static_cast<Eigen::Index>(pixels));
    ds.y.resize(keep.size());
    std::vector<unsigned char> buffer(pixels);
    for (std::size_t out_row = 0; out_row < keep.size(); ++out_row) {
        const std::uint64_t offset =
            16 + static_cast<std::uint64_t>(keep[out_row]) * pixels;
        images.seekg(static_cast<std::streamoff>(offset));
        images.read(reinterpret_cast<char*>(buffer.data()),
                    static_cast<std::streamsize>(pixels));
        if (!images) {
            throw FormatError("truncated IDX file at byte " +
                              std::to_string(offset) + ": " +
                              images_path.string());
        }
        for (std::size_t p = 0; p < pixels; ++p) {
            ds.X(static_cast<Eigen::Index>(out_row),
                 static_cast<Eigen::Index>(p)) = buffer[p];
        }
        ds.y[out_row] = label_bytes[keep[out_row]] == class_a ? -1 : 1;
    }
    ds.name = images_path.stem().string();
    return ds;
}

Dataset load_csv(const std::filesystem::path& path,
                 const std::string& label_column) {
    std::ifstream in(path);
    if (!in) {
        throw FormatError("cannot open: " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError("empty file: " + path.string());
    }
    const auto header = split_csv_line(line);
    std::size_t label_idx = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == label_column) {
            label_idx = i;
            break;
        }
    }
    if (label_idx == header.size()) {
        std::string available;
        for (const auto& name : header) {
            if (!available.empty()) {
                available += ", ";
            }
            available += name;
        }
        throw FormatError("label column '" + label_column +
                          "' not found; available: " + available);
    }
    if (header.size() < 2) {
        throw FormatError("no feature columns: " + path.string());
    }

    std::vector<std::vector<double>> rows;
    std::vector<double> raw_labels;
    std::set<double> distinct;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw FormatError("ragged row with " +
                              std::to_string(cells.size()) + " cells at line " +
                              std::to_string(line_no) + ": " + path.string());
        }
        std::vector<double> features;
        features.reserve(header.size() - 1);
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const double value = parse_cell(cells[i], line_no, path);
            if (i == label_idx) {
                distinct.insert(value);
                if (distinct.size() > 2) {
                    throw FormatError("more than two label values at line " +
                                      std::to_string(line_no) + ": " +
                                      path.string());
                }
                raw_labels.push_back(value);
            } else {
                features.push_back(value);
            }
        }
        rows.push_back(std::move(features));
    }
    if (rows.empty()) {
        throw FormatError("no data rows: " + path.string());
    }
    if (distinct.size() < 2) {
        throw FormatError("label column has a single distinct value: " +
                          path.string());
    }
    const double low = *distinct.begin();

    Dataset ds;
    ds.X.resize(static_cast<Eigen::Index>(rows.size()),
                static_cast<Eigen::Index>(header.size() - 1));
    ds.y.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            ds.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                rows[i][j];
        }
        ds.y[i] = raw_labels[i] == low ? -1 : 1;
    }
    ds.name = path.stem().string();
    return ds;
}

StandardizeResult standardize(const Eigen::MatrixXd& X) {
    if (X.rows() < 2) {
        throw InputError("standardize: need at least two rows");
    }
    const double n = static_cast<double>(X.rows());
    StandardizeResult result;
    result.mean = X.colwise().sum() / n;
    result.stddev.resize(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        double var = 0.0;
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            const double d = X(i, j) - result.mean(j);
            var += d * d;
        }
        var /= n;
        // Columns this flat carry no signal; zero them instead of
        // amplifying rounding noise.
        result.stddev(j) = var <= 1e-24 ? 0.0 : std::sqrt(var);
    }
    result.X = apply_standardization(X, result.mean, result.stddev);
    return result;
}

Eigen::MatrixXd apply_standardization(const Eigen::MatrixXd& X,
                                      const Eigen::VectorXd& mean,
                                      const Eigen::VectorXd& stddev) {
    if (X.cols() != mean.size() || X.cols() != stddev.size()) {
        throw InputError("apply_standardization: statistics width mismatch");
    }
    Eigen::MatrixXd out(X.rows(), X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        if (stddev(j) == 0.0) {
            out.col(j).setZero();
        } else {
            out.col(j) = (X.col(j).array() - mean(j)) / stddev(j);
        }
    }
    return out;
}

PcaModel pca_fit(const Eigen::MatrixXd& X, int d) {
    const Eigen::Index max_d = std::min(X.rows(), X.cols());
    if (d < 1 || static_cast<Eigen::Index>(d) > max_d) {
        throw InputError("pca_fit: target dimension " + std::to_string(d) +
                         " outside [1, " + std::to_string(max_d) + "]");
    }
    PcaModel model;
    model.mean = X.colwise().sum() / static_cast<double>(X.rows());
    const Eigen::MatrixXd centered = X.rowwise() - model.mean.transpose();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) {
        throw NumericError("pca_fit: SVD failed to converge");
    }
    model.components.resize(d, X.cols());
    model.explained_variance.resize(d);
    for (int k = 0; k < d; ++k) {
        Eigen::VectorXd component = svd.matrixV().col(k);
        // Deterministic orientation: largest-magnitude entry non-negative.
        Eigen::Index pivot = 0;
        component.cwiseAbs().maxCoeff(&pivot);
        if (component(pivot) < 0.0) {
            component = -component;
        }
        model.components.row(k) = component.transpose();
        const double s = svd.singularValues()(k);
        model.explained_variance(k) = s * s / static_cast<double>(X.rows());
    }
    return model;
}

Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& X) {
    if (X.cols() != model.components.cols()) {
        throw InputError("pca_transform: feature width " +
                         std::to_string(X.cols()) + " does not match model " +
                         std::to_string(model.components.cols()));
    }
    return (X.rowwise() - model.mean.transpose()) * model.components.transpose();
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, int n_train,
                                             int n_test,
                                             std::uint64_t rng_seed) {
    if (n_train < 2 || n_test < 1) {
        throw InputError("split_train_test: need n_train >= 2, n_test >= 1");
    }
    if (ds.y.size() != static_cast<std::size_t>(ds.X.rows())) {
        throw InputError("split_train_test: label count mismatch");
    }
    std::vector<std::size_t> neg;
    std::vector<std::size_t> pos;
    for (std::size_t i = 0; i < ds.y.size(); ++i) {
        (ds.y[i] == -1 ? neg : pos).push_back(i);
    }
    // Per-side class quotas balanced within one; +1 takes the odd slot.
    const int train_neg = n_train / 2;
    const int train_pos = n_train - train_neg;
    const int test_neg = n_test / 2;
    const int test_pos = n_test - test_neg;
    if (neg.size() < static_cast<std::size_t>(train_neg + test_neg) ||
        pos.size() < static_cast<std::size_t>(train_pos + test_pos)) {
        throw InputError(
            "split_train_test: not enough rows per class (have " +
            std::to_string(neg.size()) + " / " + std::to_string(pos.size()) +
            ", need " + std::to_string(train_neg + test_neg) + " / " +
            std::to_string(train_pos + test_pos) + ")");
    }

    Rng neg_rng = Rng::keyed(rng_seed, 0x73706c69742dull);
    Rng pos_rng = Rng::keyed(rng_seed, 0x73706c69742bull);
    neg_rng.shuffle(neg);
    pos_rng.shuffle(pos);

    std::vector<std::size_t> train_idx(neg.begin(), neg.begin() + train_neg);
    train_idx.insert(train_idx.end(), pos.begin(), pos.begin() + train_pos);
    std::vector<std::size_t> test_idx(neg.begin() + train_neg,
                                      neg.begin() + train_neg + test_neg);
    test_idx.insert(test_idx.end(), pos.begin() + train_pos,
                    pos.begin() + train_pos + test_pos);
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());

    const auto take = [&ds](const std::vector<std::size_t>& idx,
                            const std::string& suffix) {
        Dataset out;
        out.X.resize(static_cast<Eigen::Index>(idx.size()), ds.X.cols());
        out.y.resize(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            out.X.row(static_cast<Eigen::Index>(i)) =
                ds.X.row(static_cast<Eigen::Index>(idx[i]));
            out.y[i] = ds.y[idx[i]];
        }
        out.name = ds.name + suffix;
        return out;
    };
    return {take(train_idx, "-train"), take(test_idx, "-test")};
}

Dataset synthetic_two_class(int n, int D, double separation,
                            std::uint64_t rng_seed) {
    if (n < 2 || n % 2 != 0) {
        throw InputError("synthetic_two_class: n must be even and positive");
    }
    if (D < 1) {
        throw InputError("synthetic_two_class: D must be at least 1");
    }
    Rng rng = Rng::keyed(rng_seed, 0x73796e7468ull); // "synth"
    Eigen::VectorXd direction(D);
    double norm = 0.0;
    do {
        for (int j = 0; j < D; ++j) {
            direction(j) = rng.normal();
        }
        norm = direction.norm();
    } while (norm == 0.0);
    direction /= norm;

    Dataset ds;
    ds.X.resize(n, D);
    ds.y.resize(static_cast<std::size_t>(n));
    const int half = n / 2;
    for (int i = 0; i < n; ++i) {
        const double sign = i < half ? -1.0 : 1.0;
        for (int j = 0; j < D; ++j) {
            ds.X(i, j) = sign * 0.5 * separation * direction(j) + rng.normal();
        }
        ds.y[static_cast<std::size_t>(i)] = i < half ? -1 : 1;
    }
    ds.name = "synthetic";
    return ds;
}

void save_cache(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw FormatError("cannot open for writing: " + path.string());
    }
    write_bytes(out, &kCacheMagic, sizeof(kCacheMagic));
    write_bytes(out, &kCacheVersion, sizeof(kCacheVersion));
    const std::uint64_t n = static_cast<std::uint64_t>(ds.X.rows());
    const std::uint64_t d = static_cast<std::uint64_t>(ds.X.cols());
    const std::uint64_t name_len = ds.name.size();
    write_bytes(out, &n, sizeof(n));
    write_bytes(out, &d, sizeof(d));
    write_bytes(out, &name_len, sizeof(name_len));
    write_bytes(out, ds.name.data(), ds.name.size());
    for (Eigen::Index i = 0; i < ds.X.rows(); ++i) {
        for (Eigen::Index j = 0; j < ds.X.cols(); ++j) {
            const double v = ds.X(i, j);
            write_bytes(out, &v, sizeof(v));
        }
    }
    for (const int label : ds.y) {
        const std::int32_t v = label;
        write_bytes(out, &v, sizeof(v));
    }
    if (!out) {
        throw FormatError("write failed: " + path.string());
    }
}

Dataset load_cache(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open: " + path.string());
    }
    std::uint64_t magic = 0;
    read_bytes(in, &magic, sizeof(magic), path);
    if (magic != kCacheMagic) {
        throw FormatError("not a dataset cache file: " + path.string());
    }
    std::uint32_t version = 0;
    read_bytes(in, &version, sizeof(version), path);
    if (version != kCacheVersion) {
        throw FormatError("unsupported cache version " +
                          std::to_string(version) + ": " + path.string());
    }
    std::uint64_t n = 0;
    std::uint64_t d = 0;
    std::uint64_t name_len = 0;
    read_bytes(in, &n, sizeof(n), path);
    read_bytes(in, &d, sizeof(d), path);
    read_bytes(in, &name_len, sizeof(name_len), path);
    if (n == 0 || d == 0 || n > (1ull << 32) || d > (1ull << 32) ||
        name_len > (1ull << 16)) {
        throw FormatError("implausible cache header: " + path.string());
    }
    Dataset ds;
    ds.name.resize(name_len);
    read_bytes(in, ds.name.data(), name_len, path);
    ds.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < ds.X.rows(); ++i) {
        for (Eigen::Index j = 0; j < ds.X.cols(); ++j) {
            double v = 0.0;
            read_bytes(in, &v, sizeof(v), path);
            ds.X(i, j) = v;
        }
    }
    ds.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::int32_t v = 0;
        read_bytes(in, &v, sizeof(v), path);
        if (v != -1 && v != 1) {
            throw FormatError("bad label in cache: " + path.string());
        }
        ds.y[i] = v;
    }
    check_finite(ds.X, "load_cache(" + path.string() + ")");
    return ds;
}

Dataset preprocess(const Dataset& ds, const PreprocessOptions& options) {
    const auto std_result = standardize(ds.X);
    const PcaModel pca = pca_fit(std_result.X, options.target_dimension);
    Eigen::MatrixXd projected = pca_transform(pca, std_result.X);
    if (options.restandardize) {
        projected = standardize(projected).X;
    }
    Dataset out;
    out.X = std::move(projected);
    out.y = ds.y;
    out.name = ds.name;
    return out;
}

std::pair<Dataset, Dataset> preprocess_and_split(const Dataset& pool,
                                                 const PreprocessOptions& options,
                                                 int n_train, int n_test,
                                                 std::uint64_t rng_seed) {
    if (options.pca_on_pool) {
        return split_train_test(preprocess(pool, options), n_train, n_test,
                                rng_seed);
    }
    auto [train, test] = split_train_test(pool, n_train, n_test, rng_seed);
    const auto std_result = standardize(train.X);
    train.X = std_result.X;
    test.X = apply_standardization(test.X, std_result.mean, std_result.stddev);
    const PcaModel pca = pca_fit(train.X, options.target_dimension);
    train.X = pca_transform(pca, train.X);
    test.X = pca_transform(pca, test.X);
    if (options.restandardize) {
        const auto re = standardize(train.X);
        train.X = re.X;
        test.X = apply_standardization(test.X, re.mean, re.stddev);
    }
    return {std::move(train), std::move(test)};
}

} // namespace qklab
