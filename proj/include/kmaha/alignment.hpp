#pragma once

// Kernel construction from a bank of base kernels: alignment-optimal
// nonnegative combinations (quadratic and linear program variants) and the
// plain unweighted sum.

#include "kmaha/kernel.hpp"
#include "kmaha/numerics.hpp"

#include <Eigen/Core>

#include <vector>

namespace kmaha::alignment {

struct KernelBank {
    std::vector<kernel::KernelSpec> base_specs;
    /// Training Grams, divided by their Frobenius norms when `normalized`.
    std::vector<Eigen::MatrixXd> base_grams;
    /// Frobenius norms of the raw Grams.
    std::vector<double> raw_norms;
    bool normalized = false;

    std::size_t size() const { return base_specs.size(); }
};

KernelBank make_bank(const std::vector<kernel::KernelSpec>& specs, const Eigen::MatrixXd& points,
                     bool normalize = true);

/// Copy of `bank` with every Gram at unit Frobenius norm.
KernelBank normalized(const KernelBank& bank);

enum class AlignMethod { qp, lp, unweighted };

const char* to_string(AlignMethod method);

struct AlignmentSolution {
    /// Weights on the normalized base Grams; entries below 1e-10 are zero.
    Eigen::VectorXd weights;
    double achieved_alignment = 0.0;
    AlignMethod method = AlignMethod::qp;
    double solver_residual = 0.0;
    /// The combined kernel over the raw base specs.
    kernel::KernelSpec combined;

    Eigen::Index support_size() const { return (weights.array() > 0.0).count(); }
};

/// Maximize alignment with the ideal kernel over nonnegative combinations
/// by solving min g^T S' g s.t. g >= 0, g^T b' = 1 on normalized Grams.
AlignmentSolution align_qp(const KernelBank& bank, const kernel::IdealKernel& ideal,
                           const numerics::QpOptions& options = {});

/// Minimize the entrywise L1 norm of the combination (an upper bound of its
/// Frobenius norm) under the same constraints; a linear program.
AlignmentSolution align_lp(const KernelBank& bank, const kernel::IdealKernel& ideal);

/// sum_i k_i over the raw base kernels.
kernel::KernelSpec unweighted_sum(const std::vector<kernel::KernelSpec>& specs);
kernel::KernelSpec unweighted_sum(const KernelBank& bank);

}  // namespace kmaha::alignment
