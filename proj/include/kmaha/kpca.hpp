#pragma once

#include "kmaha/kernel.hpp"

#include <Eigen/Core>

#include <optional>

namespace kmaha::kpca {

/// Orthonormal coordinate system of the centered training images in
/// feature space. Mapping a point to these coordinates is the first step
/// of kernelizing a linear metric learner.
struct KpcaModel {
    kernel::KernelSpec kernel;
    /// Raw training inputs (n x D); needed to evaluate k' for new points.
    Eigen::MatrixXd train_points;
    /// Retained eigenvalues of the centered Gram, descending (length r).
    Eigen::VectorXd eigenvalues;
    /// n x r. Coordinates of a point are (centered k')^T projection.
    Eigen::MatrixXd projection;
    /// n x r embedded training points; columns have zero mean.
    Eigen::MatrixXd train_coordinates;
    /// Column means of the uncentered training Gram and their mean.
    Eigen::VectorXd gram_column_means;
    double gram_mean = 0.0;

    Eigen::Index rank() const { return eigenvalues.size(); }
    Eigen::Index input_dim() const { return train_points.cols(); }

    /// Same model restricted to its leading `dims` components.
    KpcaModel truncated(Eigen::Index dims) const;
};

struct KpcaOptions {
    /// Keep at most this many components.
    std::optional<Eigen::Index> max_dim;
    /// Eigenvalues <= cutoff_factor * n * eps * lambda_max are discarded.
    double cutoff_factor = 1.0;
};

KpcaModel kpca_fit(const kernel::KernelSpec& spec, const Eigen::MatrixXd& train,
                   const KpcaOptions& options = {});

/// Fit from an already computed training Gram of `train` under `spec`.
KpcaModel kpca_fit_gram(const kernel::KernelSpec& spec, const Eigen::MatrixXd& train,
                        const Eigen::MatrixXd& gram, const KpcaOptions& options = {});

/// n_points x r coordinates of `points` in the model's basis.
Eigen::MatrixXd kpca_transform(const KpcaModel& model, const Eigen::MatrixXd& points);

}  // namespace kmaha::kpca
