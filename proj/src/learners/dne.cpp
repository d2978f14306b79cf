#include "kmaha/error.hpp"
#include "kmaha/learners.hpp"
#include "kmaha/numerics.hpp"

namespace kmaha::learners {

namespace {

Eigen::MatrixXd graph_laplacian(const NeighborGraph& graph) {
    if (graph.mode != GraphMode::dne) throw InvalidArgument("dne: neighbor graph must be built in dne mode");
    Eigen::MatrixXd lap = -graph.w;
    lap.diagonal() += graph.w.rowwise().sum();
    return lap;
}

}  // namespace

Eigen::MatrixXd dne_laplacian_form(const Eigen::MatrixXd& x, const NeighborGraph& graph) {
    if (graph.w.rows() != x.rows()) throw InvalidArgument("dne: neighbor graph has wrong shape");
    Eigen::MatrixXd l = x.transpose() * graph_laplacian(graph) * x;
    return 0.5 * (l + l.transpose());
}

double dne_objective(const Eigen::MatrixXd& A, const Eigen::MatrixXd& x, const NeighborGraph& graph) {
    if (A.cols() != x.cols()) throw InvalidArgument("dne: A has wrong number of columns");
    return (A * dne_laplacian_form(x, graph) * A.transpose()).trace();
}

DneResult dne_fit(const Eigen::MatrixXd& x, const NeighborGraph& graph, Eigen::Index d) {
    if (d < 1 || d > x.cols()) throw InvalidArgument("dne_fit: output dimension must be in [1, D]");
    const Eigen::MatrixXd l = dne_laplacian_form(x, graph);
    // L is indefinite in general; its negative eigenvalues are the
    // directions separating neighboring classes.
    const auto eig = numerics::sym_eig(l);
    DneResult out;
    out.map = LinearMap{eig.eigenvectors.leftCols(d).transpose(), "dne"};
    out.objective = (out.map.A * l * out.map.A.transpose()).trace();
    out.spectrum = eig.eigenvalues;
    return out;
}

}  // namespace kmaha::learners
