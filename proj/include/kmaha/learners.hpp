#pragma once

// Mahalanobis distance learners. All of them take inputs as an n x D matrix
// whose rows are examples: raw features for the linear learners, KPCA
// coordinates for their kernelized versions.

#include "kmaha/kernel.hpp"

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace kmaha::learners {

/// x -> A x with A of shape d x D.
struct LinearMap {
    Eigen::MatrixXd A;
    std::string provenance;

    Eigen::MatrixXd apply(const Eigen::MatrixXd& rows) const { return rows * A.transpose(); }
};

/// Symmetric PSD matrix M defining ||x - y||_M^2 = (x - y)^T M (x - y).
struct Metric {
    Eigen::MatrixXd M;

    double sq_distance(const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& y) const;
    /// A factor with A^T A = M (eigenvalues clipped at zero).
    LinearMap factor() const;
};

enum class GraphMode { lmnn, dne };

struct NeighborGraph {
    /// lmnn: w(i, j) = 1 iff j is a target neighbor of i (not symmetric).
    /// dne: symmetric, +1 within-class neighbors, -1 between-class neighbors.
    Eigen::MatrixXd w;
    int k = 0;
    GraphMode mode = GraphMode::lmnn;
};

/// Squared distance between examples i and j, for choosing neighbors in a
/// space other than the learner's input space.
using PairDistance = std::function<double(Eigen::Index, Eigen::Index)>;

/// Neighbors by squared Euclidean distance between rows of `x` unless
/// `distance` is given. Ties go to the lower index. Classes with fewer than
/// k + 1 members contribute all the neighbors they have.
NeighborGraph build_neighbor_graph(const Eigen::MatrixXd& x, const std::vector<int>& labels, int k,
                                   GraphMode mode, const std::optional<PairDistance>& distance = std::nullopt);

// --- NCA -------------------------------------------------------------------

/// -sum_i sum_{j : y_j = y_i} p_ij with softmax p_ij over -||A x_i - A x_j||^2.
double nca_objective(const Eigen::MatrixXd& A, const Eigen::MatrixXd& x, const std::vector<int>& labels);
Eigen::MatrixXd nca_gradient(const Eigen::MatrixXd& A, const Eigen::MatrixXd& x,
                             const std::vector<int>& labels);

struct NcaOptions {
    int max_iterations = 100;
    /// Stop once the relative objective decrease of an iteration is below this.
    double tol = 1e-6;
    double armijo_c1 = 1e-4;
    double backtrack = 0.5;
    int max_backtracks = 40;
};

struct NcaResult {
    LinearMap map;
    std::vector<double> objective_trace;
    bool converged = false;
    /// Set when a line search failed to find a decrease; `map` is still the
    /// best iterate.
    bool line_search_failed = false;
};

/// Gradient descent with Armijo backtracking from A0 = first d rows of I.
NcaResult nca_fit(const Eigen::MatrixXd& x, const std::vector<int>& labels, Eigen::Index d,
                  const NcaOptions& options = {});
NcaResult nca_fit_from(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                       const Eigen::MatrixXd& A0, const NcaOptions& options = {});

// --- LMNN ------------------------------------------------------------------

double lmnn_objective(const Eigen::MatrixXd& M, const Eigen::MatrixXd& x, const std::vector<int>& labels,
                      const NeighborGraph& graph, double c);

/// A subgradient of lmnn_objective with respect to M.
Eigen::MatrixXd lmnn_subgradient(const Eigen::MatrixXd& M, const Eigen::MatrixXd& x,
                                 const std::vector<int>& labels, const NeighborGraph& graph, double c);

struct LmnnOptions {
    int max_iterations = 200;
    double c = 1.0;
    /// Initial step is step_scale * ||M0||_F / ||G0||_F, decaying as 1/(1+t).
    double step_scale = 0.1;
    /// Stop once the subgradient norm falls below tol * ||G0||_F.
    double tol = 1e-8;
};

struct LmnnResult {
    Metric metric;
    /// Best objective so far after each iteration (nonincreasing).
    std::vector<double> objective_trace;
};

/// Projected subgradient descent on M starting from the identity.
LmnnResult lmnn_fit(const Eigen::MatrixXd& x, const std::vector<int>& labels, const NeighborGraph& graph,
                    const LmnnOptions& options = {});

// --- DNE -------------------------------------------------------------------

/// X (D - W) X^T in the column-example convention, i.e. x^T L x for rows x.
Eigen::MatrixXd dne_laplacian_form(const Eigen::MatrixXd& x, const NeighborGraph& graph);

struct DneResult {
    LinearMap map;
    /// trace(A L A^T), equal to the sum of the d smallest eigenvalues of L.
    double objective = 0.0;
    Eigen::VectorXd spectrum;
};

/// Rows of A are the d eigenvectors of L with smallest eigenvalues.
DneResult dne_fit(const Eigen::MatrixXd& x, const NeighborGraph& graph, Eigen::Index d);

/// trace(A L A^T) for the DNE graph.
double dne_objective(const Eigen::MatrixXd& A, const Eigen::MatrixXd& x, const NeighborGraph& graph);

struct KernelTrickDneResult {
    /// d x n with U K U^T = I.
    Eigen::MatrixXd U;
    double objective = 0.0;
};

/// Kernel-trick DNE: minimize trace(U K (D - W) K U^T) s.t. U K U^T = I,
/// solved by whitening with K^{1/2}. Throws SingularKernelError when K is
/// numerically rank deficient.
KernelTrickDneResult kdne_kernel_trick_fit(const Eigen::MatrixXd& K, const NeighborGraph& graph, Eigen::Index d);

}  // namespace kmaha::learners
