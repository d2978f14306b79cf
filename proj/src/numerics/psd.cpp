#include "kmaha/numerics.hpp"

namespace kmaha::numerics {

Eigen::MatrixXd psd_project(const Eigen::MatrixXd& a) {
    const auto eig = sym_eig(a);
    const Eigen::VectorXd clipped = eig.eigenvalues.cwiseMax(0.0);
    Eigen::MatrixXd out = eig.eigenvectors * clipped.asDiagonal() * eig.eigenvectors.transpose();
    return 0.5 * (out + out.transpose());
}

}  // namespace kmaha::numerics
