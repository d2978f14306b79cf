#include "kmaha/error.hpp"
#include "kmaha/eval.hpp"
#include "pipeline_internal.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>

namespace kmaha::eval {

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view text, const std::pair<std::string_view, E> (&table)[N], const char* what) {
    for (const auto& [name, value] : table)
        if (name == text) return value;
    throw InvalidArgument(std::string("unknown ") + what + " '" + std::string(text) + "'");
}

constexpr std::pair<std::string_view, Learner> learner_names[] = {
    {"nca", Learner::nca}, {"lmnn", Learner::lmnn}, {"dne", Learner::dne}};
constexpr std::pair<std::string_view, Kernelization> kernelization_names[] = {
    {"linear", Kernelization::linear},
    {"kpca:cv", Kernelization::kpca_cv},
    {"kpca:aligned-qp", Kernelization::kpca_aligned_qp},
    {"kpca:aligned-lp", Kernelization::kpca_aligned_lp},
    {"kpca:unweighted", Kernelization::kpca_unweighted}};
constexpr std::pair<std::string_view, NeighborRule> rule_names[] = {
    {"none", NeighborRule::none}, {"embedding", NeighborRule::embedding}, {"input-space", NeighborRule::input_space}};

template <typename E, std::size_t N>
const char* enum_name(E value, const std::pair<std::string_view, E> (&table)[N]) {
    for (const auto& [name, v] : table)
        if (v == value) return name.data();
    return "?";
}

std::uint64_t fnv1a(const void* bytes, std::size_t size, std::uint64_t h = 1469598103934665603ull) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::string cache_key(const kernel::KernelSpec& spec, const Eigen::MatrixXd& train) {
    std::uint64_t h = fnv1a(train.data(), static_cast<std::size_t>(train.size()) * sizeof(double));
    const Eigen::Index shape[2] = {train.rows(), train.cols()};
    h = fnv1a(shape, sizeof(shape), h);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx|", static_cast<unsigned long long>(h));
    return buf + spec.to_string();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

const char* to_string(Learner learner) { return enum_name(learner, learner_names); }
const char* to_string(Kernelization kernelization) { return enum_name(kernelization, kernelization_names); }
const char* to_string(NeighborRule rule) { return enum_name(rule, rule_names); }
Learner parse_learner(std::string_view text) { return parse_enum(text, learner_names, "learner"); }
Kernelization parse_kernelization(std::string_view text) {
    return parse_enum(text, kernelization_names, "kernelization");
}
NeighborRule parse_neighbor_rule(std::string_view text) { return parse_enum(text, rule_names, "neighbor rule"); }

std::string MethodConfig::label() const {
    if (!name.empty()) return name;
    std::string base = learner == Learner::nca ? "NCA" : learner == Learner::lmnn ? "LMNN" : "DNE";
    switch (kernelization) {
        case Kernelization::linear: return base;
        case Kernelization::kpca_cv: return "K" + base;
        case Kernelization::kpca_aligned_qp: return "Aligned K" + base + " (QP)";
        case Kernelization::kpca_aligned_lp: return "Aligned K" + base + " (LP)";
        case Kernelization::kpca_unweighted: return "Unweighted K" + base;
    }
    return base;
}

const std::vector<kernel::KernelSpec>& MethodConfig::kernel_candidates() const {
    static const std::vector<kernel::KernelSpec> defaults = kernel::rbf_bank(kernel::default_sigma_grid());
    return candidates.empty() ? defaults : candidates;
}

NeighborRule MethodConfig::neighbor_rule() const {
    if (learner == Learner::nca) return NeighborRule::none;
    return kernelization == Kernelization::kpca_unweighted ? NeighborRule::input_space : NeighborRule::embedding;
}

std::shared_ptr<const kpca::KpcaModel> KpcaCache::get(const kernel::KernelSpec& spec, const Eigen::MatrixXd& train) {
    const std::string key = cache_key(spec, train);
    {
        std::lock_guard lock(mutex_);
        if (auto it = models_.find(key); it != models_.end()) return it->second;
    }
    auto model = std::make_shared<const kpca::KpcaModel>(kpca::kpca_fit(spec, train));
    std::lock_guard lock(mutex_);
    return models_.emplace(key, std::move(model)).first->second;
}

std::size_t KpcaCache::size() const {
    std::lock_guard lock(mutex_);
    return models_.size();
}

Eigen::MatrixXd FittedPipeline::embed(const Eigen::MatrixXd& raw) const {
    if (raw.cols() != input_dim)
        throw InvalidArgument("pipeline: input has " + std::to_string(raw.cols()) + " features, model expects " +
                              std::to_string(input_dim));
    Eigen::MatrixXd x = standardizer ? standardizer->apply(raw) : raw;
    if (kpca) x = kpca::kpca_transform(*kpca, x);
    return transform.apply(x);
}

std::vector<int> FittedPipeline::predict(const Eigen::MatrixXd& raw, int k_nn) const {
    return knn_classify(train_embedding, train_labels, class_count, embed(raw), k_nn);
}

namespace detail {

FittedPipeline fit_preprocessed(const MethodConfig& config, const data::Dataset& ds,
                                const std::optional<kernel::KernelSpec>& kernel, KpcaCache* cache) {
    FittedPipeline p;
    p.config = config;
    p.neighbor_rule = config.neighbor_rule();
    p.train_labels = ds.labels;
    p.class_count = ds.class_count;
    p.class_names = ds.class_names;
    p.input_dim = ds.dim();

    const Eigen::MatrixXd& x = ds.features;
    Eigen::MatrixXd z;
    if (kernel) {
        kpca::KpcaModel model = cache ? *cache->get(*kernel, x) : kpca::kpca_fit(*kernel, x);
        if (config.max_dim) model = model.truncated(*config.max_dim);
        z = model.train_coordinates;
        p.kpca = std::move(model);
    } else {
        z = x;
    }
    const Eigen::Index r = z.cols();

    std::optional<learners::PairDistance> input_distance;
    if (p.neighbor_rule == NeighborRule::input_space)
        input_distance = [&x](Eigen::Index i, Eigen::Index j) { return (x.row(i) - x.row(j)).squaredNorm(); };

    switch (config.learner) {
        case Learner::nca: {
            const Eigen::Index d = std::min(config.dim.value_or(r), r);
            auto fit = learners::nca_fit(z, ds.labels, d, config.nca);
            p.transform = std::move(fit.map);
            p.objective_trace = std::move(fit.objective_trace);
            break;
        }
        case Learner::lmnn: {
            const auto graph =
                learners::build_neighbor_graph(z, ds.labels, config.k, learners::GraphMode::lmnn, input_distance);
            auto fit = learners::lmnn_fit(z, ds.labels, graph, config.lmnn);
            p.transform = fit.metric.factor();
            p.transform.provenance = "lmnn";
            p.objective_trace = std::move(fit.objective_trace);
            break;
        }
        case Learner::dne: {
            const Eigen::Index d = std::min(config.dim.value_or(std::min(ds.dim(), r)), r);
            const auto graph =
                learners::build_neighbor_graph(z, ds.labels, config.k, learners::GraphMode::dne, input_distance);
            auto fit = learners::dne_fit(z, graph, d);
            p.transform = std::move(fit.map);
            p.objective_trace = {fit.objective};
            break;
        }
    }
    p.train_embedding = p.transform.apply(z);
    return p;
}

}  // namespace detail

FittedPipeline fit_pipeline(const MethodConfig& config, const data::Dataset& train, const FitOptions& options) {
    train.check_learnable();
    if (config.k_nn < 1) throw InvalidArgument("k_nn must be >= 1");
    data::Dataset ds = train;
    std::optional<data::Standardizer> standardizer;
    if (options.standardize) {
        standardizer = data::Standardizer::fit(train.features);
        ds.features = standardizer->apply(train.features);
    }

    std::optional<kernel::KernelSpec> kernel;
    std::optional<alignment::AlignmentSolution> solution;
    double selection = 0.0;
    const auto start = std::chrono::steady_clock::now();
    switch (config.kernelization) {
        case Kernelization::linear: break;
        case Kernelization::kpca_cv:
            kernel = cross_validate_kernel(config, ds, config.kernel_candidates(), config.folds, options.seed,
                                           options.cache);
            selection = seconds_since(start);
            break;
        case Kernelization::kpca_aligned_qp:
        case Kernelization::kpca_aligned_lp: {
            const auto bank = alignment::make_bank(config.kernel_candidates(), ds.features);
            const auto ideal = kernel::ideal_kernel(ds.labels, ds.class_count);
            solution = config.kernelization == Kernelization::kpca_aligned_qp ? alignment::align_qp(bank, ideal)
                                                                               : alignment::align_lp(bank, ideal);
            kernel = solution->combined;
            selection = seconds_since(start);
            break;
        }
        case Kernelization::kpca_unweighted:
            kernel = alignment::unweighted_sum(config.kernel_candidates());
            selection = seconds_since(start);
            break;
    }

    FittedPipeline p = detail::fit_preprocessed(config, ds, kernel, options.cache);
    p.standardizer = std::move(standardizer);
    p.input_dim = train.dim();
    p.selection_seconds = selection;
    p.alignment = std::move(solution);
    return p;
}

}  // namespace kmaha::eval
