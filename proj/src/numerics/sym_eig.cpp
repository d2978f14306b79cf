#include "kmaha/error.hpp"
#include "kmaha/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace kmaha::numerics {

namespace {

// Rotate (p, q) of the symmetric matrix a so that a(p, q) becomes zero and
// accumulate the rotation into v. Only column operations touch memory
// contiguously; rows are restored from the columns by symmetry.
void rotate(Eigen::MatrixXd& a, Eigen::MatrixXd& v, Eigen::Index p, Eigen::Index q) {
    const double apq = a(p, q);
    const double app = a(p, p);
    const double aqq = a(q, q);
    const double theta = (aqq - app) / (2.0 * apq);
    double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
    if (theta < 0.0) t = -t;
    const double c = 1.0 / std::sqrt(t * t + 1.0);
    const double s = t * c;

    const Eigen::Index n = a.rows();
    double* cp = a.col(p).data();
    double* cq = a.col(q).data();
    for (Eigen::Index k = 0; k < n; ++k) {
        const double akp = cp[k];
        const double akq = cq[k];
        cp[k] = c * akp - s * akq;
        cq[k] = s * akp + c * akq;
    }
    for (Eigen::Index k = 0; k < n; ++k) {
        a(p, k) = cp[k];
        a(q, k) = cq[k];
    }
    a(p, p) = app - t * apq;
    a(q, q) = aqq + t * apq;
    a(p, q) = 0.0;
    a(q, p) = 0.0;

    double* vp = v.col(p).data();
    double* vq = v.col(q).data();
    for (Eigen::Index k = 0; k < n; ++k) {
        const double vkp = vp[k];
        const double vkq = vq[k];
        vp[k] = c * vkp - s * vkq;
        vq[k] = s * vkp + c * vkq;
    }
}

}  // namespace

SymEigResult sym_eig(const Eigen::MatrixXd& input, const SymEigOptions& options) {
    if (input.rows() != input.cols()) throw InvalidArgument("sym_eig: matrix must be square");
    if (!input.allFinite()) throw InvalidArgument("sym_eig: non-finite entries");
    const Eigen::Index n = input.rows();
    const double norm = input.norm();
    if (norm > 0.0 && (input - input.transpose()).norm() > options.symmetry_tol * norm)
        throw InvalidArgument("sym_eig: matrix is not symmetric");

    Eigen::MatrixXd a = 0.5 * (input + input.transpose());
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);

    // Off-diagonal entries below this contribute nothing measurable to the
    // spectrum at double precision.
    const double threshold = std::numeric_limits<double>::epsilon() * norm / std::max<double>(1.0, static_cast<double>(n));
    int sweep = 0;
    for (; sweep < options.max_sweeps; ++sweep) {
        bool rotated = false;
        for (Eigen::Index p = 0; p + 1 < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= threshold) continue;
                // Entry is negligible relative to both diagonal entries.
                const double g = 100.0 * std::abs(apq);
                if (std::abs(a(p, p)) + g == std::abs(a(p, p)) &&
                    std::abs(a(q, q)) + g == std::abs(a(q, q))) {
                    a(p, q) = 0.0;
                    a(q, p) = 0.0;
                    continue;
                }
                rotate(a, v, p, q);
                rotated = true;
            }
        }
        if (!rotated) break;
    }
    if (sweep == options.max_sweeps)
        throw NumericalError("sym_eig: Jacobi iteration did not converge");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });

    SymEigResult out;
    out.eigenvalues.resize(n);
    out.eigenvectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index src = order[static_cast<std::size_t>(k)];
        out.eigenvalues(k) = a(src, src);
        auto col = out.eigenvectors.col(k);
        col = v.col(src);
        // Near-ties resolve to the lowest index so fixtures do not depend on
        // the last bit of a rotation.
        const double cmax = col.cwiseAbs().maxCoeff();
        Eigen::Index imax = 0;
        while (std::abs(col(imax)) < cmax * (1.0 - 1e-12)) ++imax;
        if (col(imax) < 0.0) col = -col;
    }
    return out;
}

}  // namespace kmaha::numerics
