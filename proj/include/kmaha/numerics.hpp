#pragma once

// Dense numerical kernels used throughout the library. Everything here is a
// pure function of its arguments.

#include <Eigen/Core>

#include <functional>
#include <vector>

namespace kmaha::numerics {

struct SymEigResult {
    /// Ascending.
    Eigen::VectorXd eigenvalues;
    /// Column i pairs with eigenvalues(i). The largest-magnitude component of
    /// every column is nonnegative.
    Eigen::MatrixXd eigenvectors;
};

struct SymEigOptions {
    /// Inputs whose relative asymmetry ||A - A^T||_F / ||A||_F exceeds this
    /// are rejected.
    double symmetry_tol = 1e-10;
    int max_sweeps = 100;
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
SymEigResult sym_eig(const Eigen::MatrixXd& a, const SymEigOptions& options = {});

/// Nearest PSD matrix in Frobenius norm (negative eigenvalues clipped to 0).
Eigen::MatrixXd psd_project(const Eigen::MatrixXd& a);

/// minimize a^T S a  subject to  a >= 0, a^T b = 1.
struct QpProblem {
    Eigen::MatrixXd S;
    Eigen::VectorXd b;
};

struct QpOptions {
    double tol = 1e-8;
    int max_iterations = 100000;
};

struct QpResult {
    Eigen::VectorXd alpha;
    double objective = 0.0;
    double kkt_residual = 0.0;
    /// Multiplier of the equality constraint.
    double mu = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Projected gradient with exact projection onto {a >= 0, a^T b = 1},
/// finished by an exact solve on the detected support. Throws
/// InfeasibleError when no b_i is positive. On hitting the iteration cap the
/// best point is returned with converged = false and its residual.
QpResult solve_qp(const QpProblem& problem, const QpOptions& options = {});

/// Euclidean projection of v onto {a >= 0, a^T b = 1}.
Eigen::VectorXd project_weighted_simplex(const Eigen::VectorXd& v, const Eigen::VectorXd& b);

/// KKT residual of a candidate point; also returns the fitted multiplier.
double qp_kkt_residual(const QpProblem& problem, const Eigen::VectorXd& alpha,
                       double* mu_out = nullptr, double support_tol = 1e-12);

/// minimize c^T x  subject to  A_eq x = b_eq,  A_le x <= b_le,  x >= 0.
struct LpProblem {
    Eigen::VectorXd c;
    Eigen::MatrixXd a_eq;
    Eigen::VectorXd b_eq;
    Eigen::MatrixXd a_le;
    Eigen::VectorXd b_le;
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    Eigen::VectorXd x;
    double objective = 0.0;
};

struct LpOptions {
    double tol = 1e-10;
    int max_pivots = 100000;
};

/// Dense two-phase tableau simplex with Bland's rule. Intended for small
/// programs. Does not throw on infeasible/unbounded input; see status.
LpResult solve_lp(const LpProblem& problem, const LpOptions& options = {});

using MatrixFunction = std::function<double(const Eigen::MatrixXd&)>;
using MatrixGradient = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;

/// Max over entries of |analytic - numeric| / max(1, |numeric|), with the
/// numeric gradient from central differences of step h.
double check_gradient(const MatrixFunction& f, const MatrixGradient& grad,
                      const Eigen::MatrixXd& x0, double h = 1e-5);

}  // namespace kmaha::numerics
