#include "kmaha/error.hpp"
#include "kmaha/eval.hpp"
#include "pipeline_internal.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace kmaha::eval {

namespace {

constexpr int max_fold_attempts = 10;
// Stream offset keeping fold shuffles apart from the split streams.
constexpr std::uint64_t fold_stream = 1u << 20;

bool folds_complete(const data::Dataset& ds, const std::vector<int>& fold, int folds) {
    std::vector<int> total(static_cast<std::size_t>(ds.class_count), 0);
    for (int y : ds.labels) ++total[static_cast<std::size_t>(y)];
    for (int f = 0; f < folds; ++f) {
        std::vector<int> held(static_cast<std::size_t>(ds.class_count), 0);
        bool nonempty = false;
        for (std::size_t i = 0; i < fold.size(); ++i) {
            if (fold[i] != f) continue;
            nonempty = true;
            ++held[static_cast<std::size_t>(ds.labels[i])];
        }
        if (!nonempty) return false;
        for (std::size_t c = 0; c < total.size(); ++c)
            if (total[c] > 0 && held[c] == total[c]) return false;
    }
    return true;
}

}  // namespace

std::vector<int> assign_folds(const data::Dataset& ds, int folds, std::uint64_t seed) {
    if (folds < 2) throw InvalidArgument("cross validation: folds must be >= 2");
    const Eigen::Index n = ds.size();
    if (n < folds) throw InvalidArgument("cross validation: fewer examples than folds");
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::vector<int> fold(static_cast<std::size_t>(n));
    for (int attempt = 0; attempt < max_fold_attempts; ++attempt) {
        auto rng = data::make_rng(seed, fold_stream + static_cast<std::uint64_t>(attempt));
        std::iota(perm.begin(), perm.end(), Eigen::Index{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        for (std::size_t r = 0; r < perm.size(); ++r)
            fold[static_cast<std::size_t>(perm[r])] = static_cast<int>(r % static_cast<std::size_t>(folds));
        if (folds_complete(ds, fold, folds)) return fold;
    }
    throw InvalidArgument("cross validation: could not form folds whose training parts contain every class");
}

kernel::KernelSpec cross_validate_kernel(const MethodConfig& config, const data::Dataset& ds,
                                         const std::vector<kernel::KernelSpec>& candidates, int folds,
                                         std::uint64_t seed, KpcaCache* cache) {
    if (candidates.empty()) throw InvalidArgument("cross validation: no candidate kernels");
    if (folds < 2) throw InvalidArgument("cross validation: folds must be >= 2");
    if (candidates.size() == 1) return candidates.front();

    const std::vector<int> fold = assign_folds(ds, folds, seed);
    std::vector<data::Dataset> fold_train, fold_test;
    for (int f = 0; f < folds; ++f) {
        std::vector<Eigen::Index> tr, te;
        for (std::size_t i = 0; i < fold.size(); ++i) (fold[i] == f ? te : tr).push_back(static_cast<Eigen::Index>(i));
        fold_train.push_back(ds.subset(tr));
        fold_test.push_back(ds.subset(te));
    }

    double best_score = -std::numeric_limits<double>::infinity();
    std::optional<std::size_t> best;
    std::string last_error;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        double total = 0.0;
        bool failed = false;
        for (int f = 0; f < folds && !failed; ++f) {
            const auto uf = static_cast<std::size_t>(f);
            try {
                const auto p = detail::fit_preprocessed(config, fold_train[uf], candidates[c], cache);
                const auto embedded = p.transform.apply(kpca::kpca_transform(*p.kpca, fold_test[uf].features));
                total += accuracy(knn_classify(p.train_embedding, p.train_labels, p.class_count, embedded,
                                               std::min<int>(config.k_nn, static_cast<int>(fold_train[uf].size()))),
                                  fold_test[uf].labels);
            } catch (const NumericalError& e) {
                // A candidate that cannot be fitted on some fold is not selectable.
                failed = true;
                last_error = e.what();
            }
        }
        if (failed) continue;
        const double score = total / folds;
        if (score > best_score) {
            best_score = score;
            best = c;
        }
    }
    if (!best) throw NumericalError("cross validation: every candidate kernel failed: " + last_error);
    return candidates[*best];
}

}  // namespace kmaha::eval
