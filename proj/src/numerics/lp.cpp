#include "kmaha/error.hpp"
#include "kmaha/numerics.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace kmaha::numerics {

namespace {

// Tableau layout: rows 0..r-1 are constraints, row r is the objective
// (reduced costs); the last column holds right-hand sides. basis[i] is the
// column basic in row i.
struct Tableau {
    Eigen::MatrixXd t;
    std::vector<Eigen::Index> basis;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;  // variable columns, rhs excluded

    void pivot(Eigen::Index row, Eigen::Index col) {
        t.row(row) /= t(row, col);
        for (Eigen::Index i = 0; i <= rows; ++i) {
            if (i == row) continue;
            const double factor = t(i, col);
            if (factor != 0.0) t.row(i) -= factor * t.row(row);
        }
        basis[static_cast<std::size_t>(row)] = col;
    }

    // Load reduced costs for the cost vector `cost` (length cols).
    void set_objective(const Eigen::VectorXd& cost) {
        t.row(rows).setZero();
        t.row(rows).head(cols) = cost.transpose();
        for (Eigen::Index i = 0; i < rows; ++i) {
            const double cb = cost(basis[static_cast<std::size_t>(i)]);
            if (cb != 0.0) t.row(rows) -= cb * t.row(i);
        }
    }

    // Returns false when unbounded. `allowed` masks columns that may enter.
    bool optimize(const std::vector<bool>& allowed, const LpOptions& options) {
        for (int pivots = 0; pivots < options.max_pivots; ++pivots) {
            Eigen::Index enter = -1;
            for (Eigen::Index j = 0; j < cols; ++j) {
                if (allowed[static_cast<std::size_t>(j)] && t(rows, j) < -options.tol) {
                    enter = j;
                    break;
                }
            }
            if (enter < 0) return true;
            Eigen::Index leave = -1;
            double best = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < rows; ++i) {
                const double a = t(i, enter);
                if (a <= options.tol) continue;
                const double ratio = t(i, cols) / a;
                if (ratio < best - options.tol ||
                    (std::abs(ratio - best) <= options.tol &&
                     basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
                    best = ratio;
                    leave = i;
                }
            }
            if (leave < 0) return false;
            pivot(leave, enter);
        }
        throw NumericalError("solve_lp: pivot limit reached");
    }
};

}  // namespace

LpResult solve_lp(const LpProblem& problem, const LpOptions& options) {
    const Eigen::Index q = problem.c.size();
    const Eigen::Index n_eq = problem.a_eq.rows();
    const Eigen::Index n_le = problem.a_le.rows();
    if ((n_eq > 0 && (problem.a_eq.cols() != q || problem.b_eq.size() != n_eq)) ||
        (n_le > 0 && (problem.a_le.cols() != q || problem.b_le.size() != n_le)))
        throw InvalidArgument("solve_lp: dimension mismatch");

    const Eigen::Index rows = n_eq + n_le;
    // Columns: x (q), slacks (n_le), artificials (one per row that needs one).
    std::vector<bool> needs_artificial(static_cast<std::size_t>(rows), false);
    Eigen::Index n_art = 0;
    for (Eigen::Index i = 0; i < rows; ++i) {
        const bool need = i < n_eq || problem.b_le(i - n_eq) < 0.0;
        needs_artificial[static_cast<std::size_t>(i)] = need;
        if (need) ++n_art;
    }
    const Eigen::Index cols = q + n_le + n_art;

    Tableau tab;
    tab.rows = rows;
    tab.cols = cols;
    tab.t = Eigen::MatrixXd::Zero(rows + 1, cols + 1);
    tab.basis.assign(static_cast<std::size_t>(rows), 0);

    Eigen::Index art = q + n_le;
    for (Eigen::Index i = 0; i < rows; ++i) {
        auto row = tab.t.row(i);
        double rhs = 0.0;
        if (i < n_eq) {
            row.head(q) = problem.a_eq.row(i);
            rhs = problem.b_eq(i);
        } else {
            row.head(q) = problem.a_le.row(i - n_eq);
            row(q + (i - n_eq)) = 1.0;
            rhs = problem.b_le(i - n_eq);
        }
        if (rhs < 0.0) {
            row.head(q + n_le) *= -1.0;
            rhs = -rhs;
        }
        row(cols) = rhs;
        if (needs_artificial[static_cast<std::size_t>(i)]) {
            row(art) = 1.0;
            tab.basis[static_cast<std::size_t>(i)] = art++;
        } else {
            tab.basis[static_cast<std::size_t>(i)] = q + (i - n_eq);
        }
    }

    LpResult result;
    std::vector<bool> allowed(static_cast<std::size_t>(cols), true);

    if (n_art > 0) {
        Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(cols);
        phase1.tail(n_art).setOnes();
        tab.set_objective(phase1);
        tab.optimize(allowed, options);
        const double infeasibility = -tab.t(rows, cols);
        const double scale = std::max(1.0, tab.t.col(cols).head(rows).cwiseAbs().maxCoeff());
        if (infeasibility > 1e3 * options.tol * scale) {
            result.status = LpStatus::infeasible;
            return result;
        }
        // Drive remaining zero-level artificials out of the basis.
        for (Eigen::Index i = 0; i < rows; ++i) {
            if (tab.basis[static_cast<std::size_t>(i)] < q + n_le) continue;
            for (Eigen::Index j = 0; j < q + n_le; ++j) {
                if (std::abs(tab.t(i, j)) > options.tol) {
                    tab.pivot(i, j);
                    break;
                }
            }
        }
        for (Eigen::Index j = q + n_le; j < cols; ++j) allowed[static_cast<std::size_t>(j)] = false;
    }

    Eigen::VectorXd cost = Eigen::VectorXd::Zero(cols);
    cost.head(q) = problem.c;
    tab.set_objective(cost);
    if (!tab.optimize(allowed, options)) {
        result.status = LpStatus::unbounded;
        return result;
    }

    result.status = LpStatus::optimal;
    result.x = Eigen::VectorXd::Zero(q);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const Eigen::Index b = tab.basis[static_cast<std::size_t>(i)];
        if (b < q) result.x(b) = std::max(0.0, tab.t(i, cols));
    }
    result.objective = problem.c.dot(result.x);
    return result;
}

}  // namespace kmaha::numerics
