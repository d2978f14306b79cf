#include "kmaha/error.hpp"
#include "kmaha/learners.hpp"

#include <cmath>
#include <limits>

namespace kmaha::learners {

namespace {

void check_inputs(const Eigen::MatrixXd& A, const Eigen::MatrixXd& x, const std::vector<int>& labels) {
    if (A.cols() != x.cols()) throw InvalidArgument("nca: A has wrong number of columns");
    if (static_cast<Eigen::Index>(labels.size()) != x.rows()) throw InvalidArgument("nca: label count mismatch");
}

// Softmax neighbor probabilities p(i, j) with p(i, i) = 0.
Eigen::MatrixXd neighbor_probabilities(const Eigen::MatrixXd& A, const Eigen::MatrixXd& x) {
    const Eigen::MatrixXd z = x * A.transpose();
    const Eigen::Index n = x.rows();
    const Eigen::VectorXd sq = z.rowwise().squaredNorm();
    Eigen::MatrixXd logits = -((sq.replicate(1, n) + sq.transpose().replicate(n, 1)) - 2.0 * z * z.transpose());
    Eigen::MatrixXd p(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        logits(i, i) = -std::numeric_limits<double>::infinity();
        const double shift = logits.row(i).maxCoeff();
        double total = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double e = j == i ? 0.0 : std::exp(logits(i, j) - shift);
            p(i, j) = e;
            total += e;
        }
        p.row(i) /= total;
    }
    return p;
}

}  // namespace

double nca_objective(const Eigen::MatrixXd& A, const Eigen::MatrixXd& x, const std::vector<int>& labels) {
    check_inputs(A, x, labels);
    const Eigen::MatrixXd p = neighbor_probabilities(A, x);
    double f = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.rows(); ++j)
            if (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]) f -= p(i, j);
    return f;
}

Eigen::MatrixXd nca_gradient(const Eigen::MatrixXd& A, const Eigen::MatrixXd& x,
                             const std::vector<int>& labels) {
    check_inputs(A, x, labels);
    const Eigen::Index n = x.rows();
    const Eigen::MatrixXd p = neighbor_probabilities(A, x);

    // df/dA = -2 A sum_{i,k} a_ik (x_i - x_k)(x_i - x_k)^T with
    // a_ik = p_i p_ik - [y_k = y_i] p_ik and p_i the same-class mass of row i.
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double pi = 0.0;
        for (Eigen::Index k = 0; k < n; ++k)
            if (labels[static_cast<std::size_t>(k)] == labels[static_cast<std::size_t>(i)]) pi += p(i, k);
        for (Eigen::Index k = 0; k < n; ++k) {
            const bool same = labels[static_cast<std::size_t>(k)] == labels[static_cast<std::size_t>(i)];
            a(i, k) = pi * p(i, k) - (same ? p(i, k) : 0.0);
        }
    }
    // sum_{i,k} a_ik (x_i - x_k)(x_i - x_k)^T = X^T (diag(S 1) - S) X, S = a + a^T.
    const Eigen::MatrixXd s = a + a.transpose();
    Eigen::MatrixXd lap = -s;
    lap.diagonal() += s.rowwise().sum();
    return -2.0 * A * (x.transpose() * lap * x);
}

NcaResult nca_fit_from(const Eigen::MatrixXd& x, const std::vector<int>& labels, const Eigen::MatrixXd& A0,
                       const NcaOptions& options) {
    check_inputs(A0, x, labels);
    NcaResult result;
    Eigen::MatrixXd A = A0;
    double f = nca_objective(A, x, labels);
    result.objective_trace.push_back(f);
    double step = 1.0;

    for (int it = 0; it < options.max_iterations; ++it) {
        const Eigen::MatrixXd g = nca_gradient(A, x, labels);
        const double gnorm2 = g.squaredNorm();
        if (gnorm2 <= 1e-24) {
            result.converged = true;
            break;
        }
        double t = step;
        Eigen::MatrixXd candidate;
        double f_new = f;
        bool accepted = false;
        for (int b = 0; b <= options.max_backtracks; ++b) {
            candidate = A - t * g;
            f_new = nca_objective(candidate, x, labels);
            if (f_new <= f - options.armijo_c1 * t * gnorm2) {
                accepted = true;
                break;
            }
            t *= options.backtrack;
        }
        if (!accepted) {
            result.line_search_failed = true;
            break;
        }
        const double decrease = f - f_new;
        A = std::move(candidate);
        f = f_new;
        result.objective_trace.push_back(f);
        step = t / options.backtrack;
        if (decrease <= options.tol * std::max(1.0, std::abs(f))) {
            result.converged = true;
            break;
        }
    }
    result.map = LinearMap{std::move(A), "nca"};
    return result;
}

NcaResult nca_fit(const Eigen::MatrixXd& x, const std::vector<int>& labels, Eigen::Index d,
                  const NcaOptions& options) {
    if (d < 1 || d > x.cols()) throw InvalidArgument("nca_fit: output dimension must be in [1, D]");
    return nca_fit_from(x, labels, Eigen::MatrixXd::Identity(d, x.cols()), options);
}

}  // namespace kmaha::learners
