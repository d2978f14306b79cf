#include "kmaha/kpca.hpp"

#include "kmaha/error.hpp"
#include "kmaha/numerics.hpp"

#include <cmath>
#include <limits>

namespace kmaha::kpca {

KpcaModel KpcaModel::truncated(Eigen::Index dims) const {
    if (dims >= rank()) return *this;
    if (dims < 1) throw InvalidArgument("kpca: truncation to fewer than one component");
    KpcaModel out = *this;
    out.eigenvalues = eigenvalues.head(dims);
    out.projection = projection.leftCols(dims);
    out.train_coordinates = train_coordinates.leftCols(dims);
    return out;
}

KpcaModel kpca_fit_gram(const kernel::KernelSpec& spec, const Eigen::MatrixXd& train,
                        const Eigen::MatrixXd& gram, const KpcaOptions& options) {
    const Eigen::Index n = train.rows();
    if (n < 2) throw InvalidArgument("kpca_fit: need at least 2 training points");
    if (gram.rows() != n || gram.cols() != n) throw InvalidArgument("kpca_fit: Gram shape mismatch");

    KpcaModel model;
    model.kernel = spec;
    model.train_points = train;
    model.gram_column_means = gram.colwise().mean().transpose();
    model.gram_mean = model.gram_column_means.mean();

    // K_c = H K H with H = I - (1/n) 1 1^T, written out entrywise:
    // K_c(i,j) = K(i,j) - m_i - m_j + g, with m the column means, g their mean.
    Eigen::MatrixXd centered = gram;
    centered.colwise() -= model.gram_column_means;
    centered.rowwise() -= model.gram_column_means.transpose();
    centered.array() += model.gram_mean;
    centered = 0.5 * (centered + centered.transpose());

    const auto eig = numerics::sym_eig(centered);
    const double lambda_max = eig.eigenvalues(n - 1);
    // Rounding in the centering step is relative to the uncentered entries,
    // so the cutoff never drops below that noise level.
    const double scale = std::max(lambda_max, gram.cwiseAbs().maxCoeff());
    const double cutoff = options.cutoff_factor * static_cast<double>(n) *
                          std::numeric_limits<double>::epsilon() * scale;

    Eigen::Index r = 0;
    for (Eigen::Index k = n - 1; k >= 0 && eig.eigenvalues(k) > cutoff; --k) ++r;
    if (options.max_dim) r = std::min(r, *options.max_dim);
    if (r < 1)
        throw SingularKernelError("kpca_fit: degenerate kernel, all training points coincide in feature space");

    model.eigenvalues.resize(r);
    model.projection.resize(n, r);
    model.train_coordinates.resize(n, r);
    for (Eigen::Index c = 0; c < r; ++c) {
        const Eigen::Index src = n - 1 - c;
        const double lambda = eig.eigenvalues(src);
        const double root = std::sqrt(lambda);
        model.eigenvalues(c) = lambda;
        model.projection.col(c) = eig.eigenvectors.col(src) / root;
        model.train_coordinates.col(c) = eig.eigenvectors.col(src) * root;
    }
    return model;
}

KpcaModel kpca_fit(const kernel::KernelSpec& spec, const Eigen::MatrixXd& train,
                   const KpcaOptions& options) {
    return kpca_fit_gram(spec, train, kernel::gram(spec, train).values, options);
}

Eigen::MatrixXd kpca_transform(const KpcaModel& model, const Eigen::MatrixXd& points) {
    if (points.cols() != model.input_dim()) throw InvalidArgument("kpca_transform: dimension mismatch");
    // Centering a test column k' with the training statistics:
    // k'_c = H (k' - K 1/n) = k' - m - mean(k') + g.
    Eigen::MatrixXd kx = kernel::cross_gram(model.kernel, model.train_points, points);
    const Eigen::VectorXd row_means = kx.rowwise().mean();
    kx.rowwise() -= model.gram_column_means.transpose();
    kx.colwise() -= row_means;
    kx.array() += model.gram_mean;
    return kx * model.projection;
}

}  // namespace kmaha::kpca
