#include "kmaha/error.hpp"
#include "kmaha/learners.hpp"
#include "kmaha/numerics.hpp"

#include <cmath>
#include <limits>

namespace kmaha::learners {

double Metric::sq_distance(const Eigen::Ref<const Eigen::VectorXd>& x,
                           const Eigen::Ref<const Eigen::VectorXd>& y) const {
    const Eigen::VectorXd diff = x - y;
    return diff.dot(M * diff);
}

LinearMap Metric::factor() const {
    const auto eig = numerics::sym_eig(0.5 * (M + M.transpose()));
    const Eigen::VectorXd root = eig.eigenvalues.cwiseMax(0.0).cwiseSqrt();
    return LinearMap{root.asDiagonal() * eig.eigenvectors.transpose(), "metric-factor"};
}

namespace {

void check_inputs(const Eigen::MatrixXd& M, const Eigen::MatrixXd& x, const std::vector<int>& labels,
                  const NeighborGraph& graph) {
    if (M.rows() != x.cols() || M.cols() != x.cols()) throw InvalidArgument("lmnn: M has wrong shape");
    if (static_cast<Eigen::Index>(labels.size()) != x.rows()) throw InvalidArgument("lmnn: label count mismatch");
    if (graph.w.rows() != x.rows() || graph.w.cols() != x.rows())
        throw InvalidArgument("lmnn: neighbor graph has wrong shape");
    if (graph.mode != GraphMode::lmnn) throw InvalidArgument("lmnn: neighbor graph must be built in lmnn mode");
}

// Pairwise squared distances under M.
Eigen::MatrixXd metric_distances(const Eigen::MatrixXd& M, const Eigen::MatrixXd& x) {
    const Eigen::MatrixXd g = x * M * x.transpose();
    const Eigen::VectorXd diag = g.diagonal();
    const Eigen::Index n = x.rows();
    return (diag.replicate(1, n) + diag.transpose().replicate(n, 1)) - 2.0 * g;
}

struct Evaluation {
    double objective = 0.0;
    Eigen::MatrixXd subgradient;
};

Evaluation evaluate(const Eigen::MatrixXd& M, const Eigen::MatrixXd& x, const std::vector<int>& labels,
                    const NeighborGraph& graph, double c, bool want_gradient) {
    const Eigen::Index n = x.rows();
    const Eigen::MatrixXd dist = metric_distances(M, x);
    // Coefficients a(i, j) such that the subgradient is
    // sum_{i,j} a_ij (x_i - x_j)(x_i - x_j)^T.
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    Evaluation out;
    for (Eigen::Index i = 0; i < n; ++i) {
        const int yi = labels[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < n; ++j) {
            if (graph.w(i, j) == 0.0) continue;
            const double wij = graph.w(i, j);
            out.objective += wij * dist(i, j);
            a(i, j) += wij;
            for (Eigen::Index l = 0; l < n; ++l) {
                if (labels[static_cast<std::size_t>(l)] == yi) continue;
                const double margin = 1.0 + dist(i, j) - dist(i, l);
                if (margin <= 0.0) continue;
                out.objective += c * wij * margin;
                a(i, j) += c * wij;
                a(i, l) -= c * wij;
            }
        }
    }
    if (want_gradient) {
        const Eigen::MatrixXd s = a + a.transpose();
        Eigen::MatrixXd lap = -s;
        lap.diagonal() += s.rowwise().sum();
        out.subgradient = x.transpose() * lap * x;
        out.subgradient = (0.5 * (out.subgradient + out.subgradient.transpose())).eval();
    }
    return out;
}

}  // namespace

double lmnn_objective(const Eigen::MatrixXd& M, const Eigen::MatrixXd& x, const std::vector<int>& labels,
                      const NeighborGraph& graph, double c) {
    check_inputs(M, x, labels, graph);
    if (!(c > 0.0)) throw InvalidArgument("lmnn: c must be positive");
    return evaluate(M, x, labels, graph, c, false).objective;
}

Eigen::MatrixXd lmnn_subgradient(const Eigen::MatrixXd& M, const Eigen::MatrixXd& x,
                                 const std::vector<int>& labels, const NeighborGraph& graph, double c) {
    check_inputs(M, x, labels, graph);
    return evaluate(M, x, labels, graph, c, true).subgradient;
}

LmnnResult lmnn_fit(const Eigen::MatrixXd& x, const std::vector<int>& labels, const NeighborGraph& graph,
                    const LmnnOptions& options) {
    const Eigen::Index dim = x.cols();
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(dim, dim);
    check_inputs(M, x, labels, graph);
    if (!(options.c > 0.0)) throw InvalidArgument("lmnn: c must be positive");

    LmnnResult result;
    Evaluation current = evaluate(M, x, labels, graph, options.c, true);
    double best = current.objective;
    Eigen::MatrixXd best_m = M;
    result.objective_trace.push_back(best);

    const double g0 = current.subgradient.norm();
    if (g0 == 0.0) {
        result.metric = Metric{best_m};
        return result;
    }
    const double eta0 = options.step_scale * M.norm() / g0;

    for (int t = 0; t < options.max_iterations; ++t) {
        if (current.subgradient.norm() <= options.tol * g0) break;
        const double eta = eta0 / (1.0 + t);
        M = numerics::psd_project(M - eta * current.subgradient);
        current = evaluate(M, x, labels, graph, options.c, true);
        if (current.objective < best) {
            best = current.objective;
            best_m = M;
        }
        result.objective_trace.push_back(best);
    }
    result.metric = Metric{std::move(best_m)};
    return result;
}

}  // namespace kmaha::learners
