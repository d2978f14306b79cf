#pragma once

#include "kmaha/data.hpp"

#include <Eigen/Core>
#include <Eigen/QR>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

namespace kmaha::testing {

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
    return m;
}

inline Eigen::MatrixXd random_symmetric(std::mt19937_64& rng, Eigen::Index n) {
    const Eigen::MatrixXd a = random_matrix(rng, n, n);
    return 0.5 * (a + a.transpose());
}

inline Eigen::MatrixXd random_psd(std::mt19937_64& rng, Eigen::Index n, Eigen::Index rank) {
    const Eigen::MatrixXd f = random_matrix(rng, n, rank);
    return f * f.transpose();
}

/// d x D with orthonormal rows.
inline Eigen::MatrixXd random_orthonormal_rows(std::mt19937_64& rng, Eigen::Index d, Eigen::Index D) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(rng, D, d));
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(D, d);
    return q.transpose();
}

inline std::vector<int> random_labels(std::mt19937_64& rng, Eigen::Index n, int p) {
    std::vector<int> y(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = static_cast<int>(i % p);
    std::shuffle(y.begin(), y.end(), rng);
    return y;
}

inline data::Dataset make_dataset(Eigen::MatrixXd x, std::vector<int> y, int p) {
    data::Dataset ds;
    ds.features = std::move(x);
    ds.labels = std::move(y);
    ds.class_count = p;
    return ds;
}

/// Two Gaussian blobs centered at -offset and +offset along the first axis.
inline data::Dataset blobs(std::mt19937_64& rng, Eigen::Index per_class, Eigen::Index D, double offset) {
    Eigen::MatrixXd x = random_matrix(rng, 2 * per_class, D);
    std::vector<int> y;
    for (Eigen::Index i = 0; i < 2 * per_class; ++i) {
        const int c = i < per_class ? 0 : 1;
        x(i, 0) += c == 0 ? -offset : offset;
        y.push_back(c);
    }
    return make_dataset(std::move(x), std::move(y), 2);
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

/// Fresh per-test directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("kmaha_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream(path, std::ios::binary) << text;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace kmaha::testing
