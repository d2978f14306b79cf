#include "kmaha/error.hpp"
#include "kmaha/numerics.hpp"

#include <cmath>

namespace kmaha::numerics {

double check_gradient(const MatrixFunction& f, const MatrixGradient& grad,
                      const Eigen::MatrixXd& x0, double h) {
    const Eigen::MatrixXd analytic = grad(x0);
    if (analytic.rows() != x0.rows() || analytic.cols() != x0.cols())
        throw InvalidArgument("check_gradient: gradient shape mismatch");

    double worst = 0.0;
    Eigen::MatrixXd probe = x0;
    for (Eigen::Index c = 0; c < x0.cols(); ++c) {
        for (Eigen::Index r = 0; r < x0.rows(); ++r) {
            probe(r, c) = x0(r, c) + h;
            const double up = f(probe);
            probe(r, c) = x0(r, c) - h;
            const double down = f(probe);
            probe(r, c) = x0(r, c);
            if (!std::isfinite(up) || !std::isfinite(down))
                throw NumericalError("check_gradient: non-finite objective at probe point");
            const double numeric = (up - down) / (2.0 * h);
            worst = std::max(worst, std::abs(analytic(r, c) - numeric) / std::max(1.0, std::abs(numeric)));
        }
    }
    return worst;
}

}  // namespace kmaha::numerics
