#include "kmaha/error.hpp"
#include "kmaha/learners.hpp"
#include "kmaha/numerics.hpp"

#include <cmath>
#include <limits>

namespace kmaha::learners {

KernelTrickDneResult kdne_kernel_trick_fit(const Eigen::MatrixXd& K, const NeighborGraph& graph, Eigen::Index d) {
    const Eigen::Index n = K.rows();
    if (K.cols() != n || graph.w.rows() != n) throw InvalidArgument("kdne: shape mismatch");
    if (graph.mode != GraphMode::dne) throw InvalidArgument("kdne: neighbor graph must be built in dne mode");
    if (d < 1 || d > n) throw InvalidArgument("kdne: output dimension must be in [1, n]");

    const auto keig = numerics::sym_eig(K);
    const double lambda_max = keig.eigenvalues(n - 1);
    const double cutoff = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * lambda_max;
    if (!(keig.eigenvalues(0) > cutoff)) throw SingularKernelError("singular kernel matrix");

    // K (D - W) K u = lambda K u. With z = K^{1/2} u this is the ordinary
    // problem K^{1/2} (D - W) K^{1/2} z = lambda z and u^T K u = z^T z.
    const Eigen::VectorXd root = keig.eigenvalues.cwiseSqrt();
    const Eigen::MatrixXd k_half = keig.eigenvectors * root.asDiagonal() * keig.eigenvectors.transpose();
    const Eigen::MatrixXd k_inv_half =
        keig.eigenvectors * root.cwiseInverse().asDiagonal() * keig.eigenvectors.transpose();

    Eigen::MatrixXd lap = -graph.w;
    lap.diagonal() += graph.w.rowwise().sum();
    Eigen::MatrixXd c = k_half * lap * k_half;
    c = 0.5 * (c + c.transpose());
    const auto ceig = numerics::sym_eig(c);

    KernelTrickDneResult out;
    out.U = (k_inv_half * ceig.eigenvectors.leftCols(d)).transpose();
    out.objective = ceig.eigenvalues.head(d).sum();
    return out;
}

}  // namespace kmaha::learners
