#include "kmaha/alignment.hpp"

#include "kmaha/error.hpp"

#include <cmath>

namespace kmaha::alignment {

namespace {

constexpr double zero_weight = 1e-10;
constexpr Eigen::Index max_split_entries = 2000;

Eigen::VectorXd alignment_targets(const KernelBank& bank, const kernel::IdealKernel& ideal) {
    Eigen::VectorXd b(static_cast<Eigen::Index>(bank.size()));
    for (std::size_t i = 0; i < bank.size(); ++i) {
        if (bank.base_grams[i].rows() != ideal.values.rows())
            throw InvalidArgument("alignment: ideal kernel size does not match the bank");
        b(static_cast<Eigen::Index>(i)) = kernel::frobenius_inner(bank.base_grams[i], ideal.values);
    }
    if ((b.array() > 0.0).count() == 0)
        throw InfeasibleError("alignment: no base kernel is positively aligned with the ideal kernel");
    return b;
}

AlignmentSolution finish(const KernelBank& bank, const kernel::IdealKernel& ideal, Eigen::VectorXd weights,
                         AlignMethod method, double residual) {
    AlignmentSolution out;
    out.method = method;
    out.solver_residual = residual;
    for (Eigen::Index i = 0; i < weights.size(); ++i)
        if (weights(i) < zero_weight) weights(i) = 0.0;

    Eigen::MatrixXd combined = Eigen::MatrixXd::Zero(ideal.values.rows(), ideal.values.cols());
    std::vector<std::pair<double, kernel::KernelSpec>> terms;
    for (std::size_t i = 0; i < bank.size(); ++i) {
        const double w = weights(static_cast<Eigen::Index>(i));
        if (w == 0.0) continue;
        combined += w * bank.base_grams[i];
        terms.emplace_back(w / bank.raw_norms[i], bank.base_specs[i]);
    }
    out.weights = std::move(weights);
    out.achieved_alignment = kernel::alignment(combined, ideal.values);
    out.combined = kernel::KernelSpec::weighted_sum(terms);
    return out;
}

}  // namespace

KernelBank make_bank(const std::vector<kernel::KernelSpec>& specs, const Eigen::MatrixXd& points, bool normalize) {
    if (specs.empty()) throw InvalidArgument("kernel bank: no base kernels");
    KernelBank bank;
    bank.base_specs = specs;
    for (const auto& spec : specs) {
        auto g = kernel::gram(spec, points);
        bank.raw_norms.push_back(g.values.norm());
        bank.base_grams.push_back(std::move(g.values));
    }
    return normalize ? normalized(bank) : bank;
}

KernelBank normalized(const KernelBank& bank) {
    if (bank.normalized) return bank;
    KernelBank out = bank;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!(out.raw_norms[i] > 0.0)) throw InvalidArgument("kernel bank: zero Gram matrix");
        out.base_grams[i] /= out.raw_norms[i];
    }
    out.normalized = true;
    return out;
}

const char* to_string(AlignMethod method) {
    switch (method) {
        case AlignMethod::qp: return "qp";
        case AlignMethod::lp: return "lp";
        case AlignMethod::unweighted: return "unweighted";
    }
    return "?";
}

AlignmentSolution align_qp(const KernelBank& raw, const kernel::IdealKernel& ideal,
                           const numerics::QpOptions& options) {
    const KernelBank bank = normalized(raw);
    const auto m = static_cast<Eigen::Index>(bank.size());
    numerics::QpProblem problem;
    problem.b = alignment_targets(bank, ideal);
    problem.S.resize(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = i; j < m; ++j)
            problem.S(i, j) = problem.S(j, i) = kernel::frobenius_inner(
                bank.base_grams[static_cast<std::size_t>(i)], bank.base_grams[static_cast<std::size_t>(j)]);
    const auto qp = numerics::solve_qp(problem, options);
    return finish(bank, ideal, qp.alpha, AlignMethod::qp, qp.kkt_residual);
}

AlignmentSolution align_lp(const KernelBank& raw, const kernel::IdealKernel& ideal) {
    const KernelBank bank = normalized(raw);
    const auto m = static_cast<Eigen::Index>(bank.size());
    const Eigen::VectorXd b = alignment_targets(bank, ideal);

    bool nonnegative = true;
    for (const auto& g : bank.base_grams) nonnegative = nonnegative && (g.array() >= 0.0).all();

    numerics::LpProblem lp;
    lp.a_eq.resize(1, m);
    lp.b_eq = Eigen::VectorXd::Ones(1);
    if (nonnegative) {
        // |sum_a alpha_a K_a(i,j)| = sum_a alpha_a K_a(i,j) when every Gram is
        // entrywise nonnegative, so the L1 norm is linear in alpha.
        lp.c.resize(m);
        for (Eigen::Index a = 0; a < m; ++a) lp.c(a) = bank.base_grams[static_cast<std::size_t>(a)].sum();
        lp.a_eq.row(0) = b.transpose();
        lp.a_le.resize(0, m);
        lp.b_le.resize(0);
    } else {
        // Split form: one bound variable t_ij >= |K_ij| per upper-triangle entry.
        const Eigen::Index n = ideal.values.rows();
        const Eigen::Index entries = n * (n + 1) / 2;
        if (entries > max_split_entries)
            throw InvalidArgument("align_lp: Gram too large for the split linear program (n <= 62)");
        const Eigen::Index q = m + entries;
        lp.c = Eigen::VectorXd::Zero(q);
        lp.a_eq = Eigen::MatrixXd::Zero(1, q);
        lp.a_eq.row(0).head(m) = b.transpose();
        lp.a_le = Eigen::MatrixXd::Zero(2 * entries, q);
        lp.b_le = Eigen::VectorXd::Zero(2 * entries);
        Eigen::Index e = 0;
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index i = 0; i <= j; ++i, ++e) {
                lp.c(m + e) = i == j ? 1.0 : 2.0;
                for (Eigen::Index a = 0; a < m; ++a) {
                    const double kij = bank.base_grams[static_cast<std::size_t>(a)](i, j);
                    lp.a_le(2 * e, a) = kij;
                    lp.a_le(2 * e + 1, a) = -kij;
                }
                lp.a_le(2 * e, m + e) = -1.0;
                lp.a_le(2 * e + 1, m + e) = -1.0;
            }
        }
    }

    const auto result = numerics::solve_lp(lp);
    if (result.status != numerics::LpStatus::optimal)
        throw InfeasibleError("align_lp: linear program has no optimal solution");
    const Eigen::VectorXd alpha = result.x.head(m);
    return finish(bank, ideal, alpha, AlignMethod::lp, std::abs(alpha.dot(b) - 1.0));
}

kernel::KernelSpec unweighted_sum(const std::vector<kernel::KernelSpec>& specs) {
    if (specs.empty()) throw InvalidArgument("unweighted_sum: no base kernels");
    if (specs.size() == 1) return specs.front();
    std::vector<std::pair<double, kernel::KernelSpec>> terms;
    for (const auto& s : specs) terms.emplace_back(1.0, s);
    return kernel::KernelSpec::weighted_sum(terms);
}

kernel::KernelSpec unweighted_sum(const KernelBank& bank) { return unweighted_sum(bank.base_specs); }

}  // namespace kmaha::alignment
