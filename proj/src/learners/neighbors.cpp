#include "kmaha/error.hpp"
#include "kmaha/learners.hpp"

#include <algorithm>
#include <numeric>

namespace kmaha::learners {

namespace {

// Indices j (j != i) accepted by `keep`, ordered by (distance, index).
std::vector<Eigen::Index> nearest(const Eigen::MatrixXd& dist, Eigen::Index i, int k,
                                  const std::function<bool(Eigen::Index)>& keep) {
    std::vector<Eigen::Index> cand;
    for (Eigen::Index j = 0; j < dist.cols(); ++j)
        if (j != i && keep(j)) cand.push_back(j);
    const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), cand.size());
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take), cand.end(),
                      [&](Eigen::Index a, Eigen::Index b) {
                          const double da = dist(i, a);
                          const double db = dist(i, b);
                          return da < db || (da == db && a < b);
                      });
    cand.resize(take);
    return cand;
}

}  // namespace

NeighborGraph build_neighbor_graph(const Eigen::MatrixXd& x, const std::vector<int>& labels, int k,
                                   GraphMode mode, const std::optional<PairDistance>& distance) {
    const Eigen::Index n = x.rows();
    if (static_cast<Eigen::Index>(labels.size()) != n)
        throw InvalidArgument("build_neighbor_graph: label count mismatch");
    if (n < 2) throw InvalidArgument("build_neighbor_graph: need at least 2 points");
    if (k < 1) throw InvalidArgument("build_neighbor_graph: k must be >= 1");
    if (k >= n) throw InvalidArgument("build_neighbor_graph: k must be smaller than n");

    Eigen::MatrixXd dist(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            dist(i, j) = distance ? (*distance)(i, j) : (x.row(i) - x.row(j)).squaredNorm();

    NeighborGraph g;
    g.k = k;
    g.mode = mode;
    g.w = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int yi = labels[static_cast<std::size_t>(i)];
        const auto same = nearest(dist, i, k, [&](Eigen::Index j) { return labels[static_cast<std::size_t>(j)] == yi; });
        for (Eigen::Index j : same) {
            g.w(i, j) = 1.0;
            if (mode == GraphMode::dne) g.w(j, i) = 1.0;
        }
        if (mode == GraphMode::dne) {
            const auto other =
                nearest(dist, i, k, [&](Eigen::Index j) { return labels[static_cast<std::size_t>(j)] != yi; });
            for (Eigen::Index j : other) {
                g.w(i, j) = -1.0;
                g.w(j, i) = -1.0;
            }
        }
    }
    return g;
}

}  // namespace kmaha::learners
