#include "kmaha/error.hpp"
#include "kmaha/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace kmaha::eval {

std::vector<int> knn_classify(const Eigen::MatrixXd& train_points, const std::vector<int>& train_labels,
                              int class_count, const Eigen::MatrixXd& query_points, int k_nn) {
    const Eigen::Index n = train_points.rows();
    if (n == 0) throw InvalidArgument("knn: empty training set");
    if (static_cast<Eigen::Index>(train_labels.size()) != n) throw InvalidArgument("knn: label count mismatch");
    if (k_nn < 1 || k_nn > n) throw InvalidArgument("knn: k_nn must be in [1, n_train]");
    if (query_points.cols() != train_points.cols()) throw InvalidArgument("knn: dimension mismatch");
    if (class_count < 1) throw InvalidArgument("knn: class_count must be positive");

    const Eigen::VectorXd train_sq = train_points.rowwise().squaredNorm();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::vector<int> votes(static_cast<std::size_t>(class_count));
    std::vector<double> summed(static_cast<std::size_t>(class_count));
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(query_points.rows()));

    for (Eigen::Index q = 0; q < query_points.rows(); ++q) {
        Eigen::VectorXd dist(n);
        for (Eigen::Index j = 0; j < n; ++j) dist(j) = (train_points.row(j) - query_points.row(q)).squaredNorm();
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::partial_sort(order.begin(), order.begin() + k_nn, order.end(), [&](Eigen::Index a, Eigen::Index b) {
            return dist(a) < dist(b) || (dist(a) == dist(b) && a < b);
        });
        std::fill(votes.begin(), votes.end(), 0);
        std::fill(summed.begin(), summed.end(), 0.0);
        for (int r = 0; r < k_nn; ++r) {
            const auto j = order[static_cast<std::size_t>(r)];
            const int c = train_labels[static_cast<std::size_t>(j)];
            if (c < 0 || c >= class_count) throw InvalidArgument("knn: label out of range");
            ++votes[static_cast<std::size_t>(c)];
            summed[static_cast<std::size_t>(c)] += std::sqrt(dist(j));
        }
        int best = -1;
        for (int c = 0; c < class_count; ++c) {
            const auto uc = static_cast<std::size_t>(c);
            if (votes[uc] == 0) continue;
            if (best < 0) {
                best = c;
                continue;
            }
            const auto ub = static_cast<std::size_t>(best);
            if (votes[uc] > votes[ub] || (votes[uc] == votes[ub] && summed[uc] < summed[ub])) best = c;
        }
        out.push_back(best);
    }
    return out;
}

std::vector<int> knn_predict(const FittedPipeline& pipeline, const data::Dataset& train, const data::Dataset& test,
                             int k_nn) {
    if (train.size() == 0) throw InvalidArgument("knn: empty training set");
    return knn_classify(pipeline.embed(train.features), train.labels, std::max(train.class_count, pipeline.class_count),
                        pipeline.embed(test.features), k_nn);
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& actual) {
    if (predicted.size() != actual.size()) throw InvalidArgument("accuracy: length mismatch");
    if (predicted.empty()) throw InvalidArgument("accuracy: empty input");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == actual[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

}  // namespace kmaha::eval
