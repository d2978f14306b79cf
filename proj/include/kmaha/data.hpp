#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace kmaha::data {

/// Labeled examples. Rows of `features` are examples; `labels[i]` is a
/// dense class index in [0, class_count).
struct Dataset {
    Eigen::MatrixXd features;
    std::vector<int> labels;
    int class_count = 0;
    std::vector<std::string> feature_names;
    /// Original label strings, indexed by class index. May be empty for
    /// generated data.
    std::vector<std::string> class_names;

    Eigen::Index size() const { return features.rows(); }
    Eigen::Index dim() const { return features.cols(); }

    /// Structural checks shared by every constructor path: label count,
    /// label range, finiteness.
    void check_consistent() const;

    /// Stronger checks required before handing the set to a learner:
    /// n >= 2, D >= 1, p >= 2.
    void check_learnable() const;

    /// Rows `idx` (in order) as a new dataset sharing class metadata.
    Dataset subset(std::span<const Eigen::Index> idx) const;
};

struct SplitPlan {
    std::uint64_t seed = 0;
    Eigen::Index train_size = 0;
    int repetitions = 1;
};

struct SplitIndices {
    std::vector<Eigen::Index> train;
    std::vector<Eigen::Index> test;
};

/// Column selector for load_csv: zero-based index or header name. A
/// negative index counts from the end (-1 is the last column).
using LabelColumn = std::variant<int, std::string>;

struct CsvOptions {
    LabelColumn label_column = -1;
    /// When non-empty, labels are mapped onto these names instead of being
    /// re-encoded by first appearance. Unknown labels are an error and the
    /// single-class check is skipped.
    std::vector<std::string> known_classes;
};

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});

/// Per-feature affine map fitted on one dataset and applicable to others.
struct Standardizer {
    Eigen::VectorXd mean;
    /// Population standard deviation; zero marks a constant column.
    Eigen::VectorXd scale;

    static Standardizer fit(const Eigen::MatrixXd& x);
    Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
    Dataset apply(const Dataset& ds) const;
};

/// Zero mean and unit population variance per column; constant columns
/// become zeros.
Dataset standardize(const Dataset& ds);

/// Generator for one reproducible random stream identified by (seed, stream).
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream);

SplitIndices split_indices(const Dataset& ds, const SplitPlan& plan, int rep);
std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitPlan& plan, int rep);

enum class SyntheticKind { concentric_circles, interleaved_curves };

SyntheticKind parse_synthetic_kind(std::string_view name);

Dataset make_synthetic(SyntheticKind kind, int n_per_class, double noise, std::uint64_t seed);

}  // namespace kmaha::data
