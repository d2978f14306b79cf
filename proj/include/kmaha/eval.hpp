#pragma once

// Fitting complete pipelines (standardize, optionally embed with KPCA, learn
// a linear map), kNN classification under the learned map, kernel selection
// by cross validation and the repeated random split protocol.

#include "kmaha/alignment.hpp"
#include "kmaha/data.hpp"
#include "kmaha/kernel.hpp"
#include "kmaha/kpca.hpp"
#include "kmaha/learners.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kmaha::eval {

enum class Learner { nca, lmnn, dne };
enum class Kernelization { linear, kpca_cv, kpca_aligned_qp, kpca_aligned_lp, kpca_unweighted };

/// How LMNN and DNE chose target neighbors. NCA has none.
enum class NeighborRule { none, embedding, input_space };

const char* to_string(Learner learner);
const char* to_string(Kernelization kernelization);
const char* to_string(NeighborRule rule);
Learner parse_learner(std::string_view text);
Kernelization parse_kernelization(std::string_view text);
NeighborRule parse_neighbor_rule(std::string_view text);

struct MethodConfig {
    /// Display name; label() derives one when empty.
    std::string name;
    Learner learner = Learner::dne;
    Kernelization kernelization = Kernelization::linear;
    /// Candidate kernels for cross validation, or the base bank for the
    /// aligned and unweighted kernels. Empty means the default RBF grid.
    std::vector<kernel::KernelSpec> candidates;
    int folds = 5;
    /// Cap on the number of KPCA components handed to the learner.
    std::optional<Eigen::Index> max_dim;
    /// Output dimension of the learned map. Unset: full embedding dimension
    /// for NCA, and min(raw input dimension, embedding dimension) for DNE.
    /// LMNN learns a full metric and ignores it.
    std::optional<Eigen::Index> dim;
    /// Target neighbors per point for LMNN and DNE.
    int k = 3;
    /// Neighbors used by the kNN classifier.
    int k_nn = 1;
    learners::NcaOptions nca;
    learners::LmnnOptions lmnn;

    std::string label() const;
    bool kernelized() const { return kernelization != Kernelization::linear; }
    const std::vector<kernel::KernelSpec>& kernel_candidates() const;
    NeighborRule neighbor_rule() const;
};

/// Full-rank KPCA models keyed by (training matrix, kernel), shared by the
/// learners of one split. Thread safe.
class KpcaCache {
public:
    std::shared_ptr<const kpca::KpcaModel> get(const kernel::KernelSpec& spec, const Eigen::MatrixXd& train);
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<const kpca::KpcaModel>> models_;
};

/// x -> A phi(x), with phi the KPCA embedding (identity when linear).
struct FittedPipeline {
    MethodConfig config;
    std::optional<data::Standardizer> standardizer;
    std::optional<kpca::KpcaModel> kpca;
    learners::LinearMap transform;
    NeighborRule neighbor_rule = NeighborRule::none;
    /// Transformed training points and their labels, the kNN reference set.
    Eigen::MatrixXd train_embedding;
    std::vector<int> train_labels;
    int class_count = 0;
    std::vector<std::string> class_names;
    Eigen::Index input_dim = 0;
    std::vector<double> objective_trace;
    /// Wall-clock seconds spent choosing the kernel (zero when linear).
    double selection_seconds = 0.0;
    std::optional<alignment::AlignmentSolution> alignment;

    /// Maps raw input rows into the learned space.
    Eigen::MatrixXd embed(const Eigen::MatrixXd& raw) const;
    /// kNN labels of raw input rows against the stored training embedding.
    std::vector<int> predict(const Eigen::MatrixXd& raw, int k_nn) const;
};

struct FitOptions {
    bool standardize = true;
    std::uint64_t seed = 0;
    KpcaCache* cache = nullptr;
};

/// Fits every stage on `train` only.
FittedPipeline fit_pipeline(const MethodConfig& config, const data::Dataset& train, const FitOptions& options = {});

/// Majority vote among the k_nn nearest rows of `train_points`. Distance
/// ties go to the lower training index; vote ties go to the class with the
/// smallest summed distance, then the lower class index.
std::vector<int> knn_classify(const Eigen::MatrixXd& train_points, const std::vector<int>& train_labels,
                              int class_count, const Eigen::MatrixXd& query_points, int k_nn);

/// kNN with `train` and `test` both mapped through the pipeline.
std::vector<int> knn_predict(const FittedPipeline& pipeline, const data::Dataset& train,
                             const data::Dataset& test, int k_nn);

double accuracy(const std::vector<int>& predicted, const std::vector<int>& actual);

/// Candidate maximizing mean fold accuracy of kpca_fit, learner fit and kNN;
/// ties go to the earlier candidate. `ds` must already be preprocessed.
kernel::KernelSpec cross_validate_kernel(const MethodConfig& config, const data::Dataset& ds,
                                         const std::vector<kernel::KernelSpec>& candidates, int folds,
                                         std::uint64_t seed, KpcaCache* cache = nullptr);

/// Fold assignment with every fold's training part containing all classes.
std::vector<int> assign_folds(const data::Dataset& ds, int folds, std::uint64_t seed);

struct WinDrawLose {
    int win = 0;
    int draw = 0;
    int lose = 0;
};

struct ExperimentOptions {
    std::string dataset_name;
    bool standardize = true;
    /// Index into the method list used for win/draw/lose.
    std::optional<std::size_t> baseline;
    int jobs = 1;
    std::function<void(const std::string&)> log;
};

struct ExperimentReport {
    std::string dataset;
    std::vector<std::string> methods;
    /// repetitions x methods; NaN marks a failed fit.
    Eigen::MatrixXd per_split_accuracy;
    std::vector<double> mean;
    /// Sample standard deviation over successful splits; 0 for one split.
    std::vector<double> std;
    std::vector<int> failures;
    std::optional<std::size_t> baseline;
    std::vector<WinDrawLose> win_draw_lose;
    /// Total kernel selection time per method. Not part of the report files.
    std::vector<double> selection_seconds;
    std::vector<std::string> warnings;
};

ExperimentReport run_experiment(const data::Dataset& ds, const std::vector<MethodConfig>& methods,
                                const data::SplitPlan& plan, const ExperimentOptions& options = {});

/// Aligned plain-text table, one row per method.
std::string format_table(const ExperimentReport& report);
/// Tab-separated summary, one row per method.
std::string format_tsv(const ExperimentReport& report);
/// Tab-separated accuracies, one row per split.
std::string format_splits_tsv(const ExperimentReport& report);
std::string format_timing_tsv(const ExperimentReport& report);

struct SweepSeries {
    std::vector<int> kernel_counts;
    std::vector<double> mean;
    std::vector<double> std;
    ExperimentReport report;
};

/// Unweighted-kernel pipelines over the prefixes 1..m of `sigma_order`.
SweepSeries base_kernel_sweep(const data::Dataset& ds, const MethodConfig& learner,
                              const std::vector<double>& sigma_order, const data::SplitPlan& plan,
                              const ExperimentOptions& options = {});

std::string format_sweep_tsv(const SweepSeries& series);

}  // namespace kmaha::eval
