#pragma once

#include "kmaha/alignment.hpp"
#include "kmaha/data.hpp"
#include "kmaha/error.hpp"
#include "kmaha/eval.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kmaha::cli {

/// Invalid configuration or command line; maps to exit code 2.
class ConfigError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_runtime = 3 };

/// Parsed run configuration.
///
/// Text format: `key = value` lines, `#` comments, and any number of
/// `[method]` sections. Keys before the first section are global:
///
///   dataset        CSV path (relative to the config file) or
///                  synthetic:concentric-circles / synthetic:interleaved-curves
///   label_column   index (negative counts from the end) or header name
///   n_per_class, noise       synthetic data size and noise
///   seed, train_size, repetitions, standardize, baseline, output, jobs
///   sigmas         comma separated RBF widths (bank and sweep order)
///   kernels        comma separated kernel specs, e.g. rbf(0.5), poly(2,1)
///   align_method   qp | lp
///   k_nn           kNN neighbors at test time
///
/// Method keys: name, learner, kernelization, sigmas, kernels, folds,
/// max_dim, dim, k, c, k_nn, max_iterations, step_scale, tol.
struct RunConfig {
    std::string dataset;
    std::filesystem::path base_dir;
    data::LabelColumn label_column = -1;
    int n_per_class = 100;
    double noise = 0.05;
    data::SplitPlan plan{0, 0, 1};
    bool standardize = true;
    std::optional<std::string> baseline;
    std::string output;
    int jobs = 1;
    std::vector<double> sigmas;
    std::vector<kernel::KernelSpec> bank;
    alignment::AlignMethod align_method = alignment::AlignMethod::qp;
    int k_nn = 1;
    std::vector<eval::MethodConfig> methods;

    /// Base kernels: `kernels` if given, else the RBF bank over `sigmas`.
    std::vector<kernel::KernelSpec> base_kernels() const;
    std::vector<double> sigma_order() const;
    bool synthetic() const;
    std::filesystem::path dataset_path() const;
};

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Loads the configured dataset; a missing file is a ConfigError naming it.
data::Dataset load_dataset(const RunConfig& config);

/// Splits on commas outside parentheses and trims each piece.
std::vector<std::string> split_list(std::string_view text);

/// JSON model artifact. Deterministic: equal pipelines give equal bytes.
std::string serialize_pipeline(const eval::FittedPipeline& pipeline, const data::LabelColumn& label_column);
struct LoadedModel {
    eval::FittedPipeline pipeline;
    data::LabelColumn label_column = -1;
};
LoadedModel deserialize_pipeline(std::string_view json);

/// Entry point shared by the executable and the tests. Writes normal output
/// to `out` and diagnostics to `err`; returns an ExitCode.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kmaha::cli
