#include "kmaha/error.hpp"
#include "kmaha/numerics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

namespace kmaha::numerics {

Eigen::VectorXd project_weighted_simplex(const Eigen::VectorXd& v, const Eigen::VectorXd& b) {
    // The projection is a(t) = max(0, v + t b) for the scalar t solving
    // g(t) = b^T a(t) = 1. g is piecewise linear and nondecreasing with
    // breakpoints -v_i / b_i, so the root is found exactly by bracketing.
    const Eigen::Index m = v.size();
    if ((b.array() > 0.0).count() == 0)
        throw InfeasibleError("projection: no positive entry in b");

    auto g = [&](double t) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) s += b(i) * std::max(0.0, v(i) + t * b(i));
        return s;
    };

    std::vector<double> breaks;
    for (Eigen::Index i = 0; i < m; ++i)
        if (b(i) != 0.0) breaks.push_back(-v(i) / b(i));
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    double t = 0.0;
    std::size_t k = 0;
    while (k < breaks.size() && g(breaks[k]) < 1.0) ++k;
    if (k == breaks.size()) {
        // Right of every breakpoint all b_i > 0 are active.
        double slope = 0.0;
        for (Eigen::Index i = 0; i < m; ++i)
            if (b(i) > 0.0) slope += b(i) * b(i);
        const double t0 = breaks.back();
        t = t0 + (1.0 - g(t0)) / slope;
    } else if (k == 0) {
        // Left of every breakpoint only b_i < 0 are active; g is linear there.
        const double t1 = breaks.front();
        const double g1 = g(t1);
        const double slope = g1 - g(t1 - 1.0);
        t = slope > 0.0 ? t1 - (g1 - 1.0) / slope : t1;
    } else {
        const double t0 = breaks[k - 1];
        const double t1 = breaks[k];
        const double g0 = g(t0);
        const double g1 = g(t1);
        t = t0 + (1.0 - g0) * (t1 - t0) / (g1 - g0);
    }

    Eigen::VectorXd out(m);
    for (Eigen::Index i = 0; i < m; ++i) out(i) = std::max(0.0, v(i) + t * b(i));
    return out;
}

double qp_kkt_residual(const QpProblem& problem, const Eigen::VectorXd& alpha, double* mu_out,
                       double support_tol) {
    const Eigen::VectorXd grad = 2.0 * problem.S * alpha;
    const double amax = alpha.maxCoeff();
    double num = 0.0;
    double den = 0.0;
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
        if (alpha(i) > support_tol * amax) {
            num += problem.b(i) * grad(i);
            den += problem.b(i) * problem.b(i);
        }
    }
    const double mu = den > 0.0 ? num / den : 0.0;
    double residual = std::abs(alpha.dot(problem.b) - 1.0);
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
        const double r = grad(i) - mu * problem.b(i);
        residual = std::max(residual, alpha(i) > support_tol * amax ? std::abs(r) : std::max(0.0, -r));
    }
    if (mu_out) *mu_out = mu;
    return residual;
}

namespace {

// Solve the equality-constrained problem restricted to the current support.
// Returns false when the restricted solution leaves the nonnegative orthant.
bool polish_on_support(const QpProblem& problem, Eigen::VectorXd& alpha) {
    const Eigen::Index m = alpha.size();
    const double amax = alpha.maxCoeff();
    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < m; ++i)
        if (alpha(i) > 1e-12 * amax) support.push_back(i);
    const auto f = static_cast<Eigen::Index>(support.size());

    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(f + 1, f + 1);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(f + 1);
    for (Eigen::Index r = 0; r < f; ++r) {
        for (Eigen::Index c = 0; c < f; ++c)
            kkt(r, c) = 2.0 * problem.S(support[static_cast<std::size_t>(r)], support[static_cast<std::size_t>(c)]);
        const double bi = problem.b(support[static_cast<std::size_t>(r)]);
        kkt(r, f) = -bi;
        kkt(f, r) = bi;
    }
    rhs(f) = 1.0;
    // Minimum-norm solution: duplicated kernels make the block singular.
    const Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    if (!sol.allFinite()) return false;
    Eigen::VectorXd candidate = Eigen::VectorXd::Zero(m);
    for (Eigen::Index r = 0; r < f; ++r) {
        if (sol(r) < 0.0) return false;
        candidate(support[static_cast<std::size_t>(r)]) = sol(r);
    }
    if (std::abs(candidate.dot(problem.b) - 1.0) > 1e-10) return false;
    alpha = candidate;
    return true;
}

}  // namespace

QpResult solve_qp(const QpProblem& problem, const QpOptions& options) {
    const Eigen::Index m = problem.b.size();
    if (m == 0 || problem.S.rows() != m || problem.S.cols() != m)
        throw InvalidArgument("solve_qp: dimension mismatch");
    if (!problem.S.allFinite() || !problem.b.allFinite())
        throw InvalidArgument("solve_qp: non-finite input");
    if ((problem.b.array() > 0.0).count() == 0)
        throw InfeasibleError("solve_qp: infeasible, no positive entry in b");

    const auto eig = sym_eig(0.5 * (problem.S + problem.S.transpose()));
    const double lipschitz = std::max(2.0 * eig.eigenvalues.maxCoeff(), 1e-300);
    const double step = 1.0 / lipschitz;

    // Start from the best single coordinate (always feasible).
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(m);
    {
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < m; ++i) {
            if (problem.b(i) <= 0.0) continue;
            const double value = problem.S(i, i) / (problem.b(i) * problem.b(i));
            if (value < best) {
                best = value;
                alpha.setZero();
                alpha(i) = 1.0 / problem.b(i);
            }
        }
    }

    auto objective = [&](const Eigen::VectorXd& a) { return a.dot(problem.S * a); };

    QpResult result;
    Eigen::VectorXd y = alpha;
    Eigen::VectorXd prev = alpha;
    double momentum = 1.0;
    double current = objective(alpha);
    int it = 0;
    for (; it < options.max_iterations; ++it) {
        Eigen::VectorXd next = project_weighted_simplex(y - step * 2.0 * (problem.S * y), problem.b);
        const double next_value = objective(next);
        if (next_value > current) {
            // Restart the momentum when the accelerated step goes uphill.
            momentum = 1.0;
            y = alpha;
            next = project_weighted_simplex(alpha - step * 2.0 * (problem.S * alpha), problem.b);
        }
        const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
        prev = alpha;
        alpha = next;
        current = objective(alpha);
        y = alpha + ((momentum - 1.0) / next_momentum) * (alpha - prev);
        momentum = next_momentum;

        if (it % 10 == 0) {
            Eigen::VectorXd polished = alpha;
            if (polish_on_support(problem, polished) &&
                qp_kkt_residual(problem, polished) <= options.tol) {
                alpha = polished;
                ++it;
                result.converged = true;
                break;
            }
            if (qp_kkt_residual(problem, alpha) <= options.tol) {
                ++it;
                result.converged = true;
                break;
            }
        }
    }

    result.alpha = alpha;
    result.objective = objective(alpha);
    result.kkt_residual = qp_kkt_residual(problem, alpha, &result.mu);
    result.iterations = it;
    result.converged = result.converged || result.kkt_residual <= options.tol;
    return result;
}

}  // namespace kmaha::numerics
