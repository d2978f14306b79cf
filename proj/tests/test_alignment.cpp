#include "doctest.h"
#include "kmaha/alignment.hpp"
#include "kmaha/error.hpp"
#include "kmaha/learners.hpp"
#include "kmaha/numerics.hpp"
#include "support.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

using namespace kmaha;
using kernel::KernelSpec;

namespace {

// Explicit feature maps in D = 2: the linear kernel and the homogeneous
// degree-2 monomials (x1^2, sqrt(2) x1 x2, x2^2), i.e. poly(2, 0).
Eigen::VectorXd linear_features(const Eigen::Vector2d& x) { return x; }
Eigen::VectorXd quadratic_features(const Eigen::Vector2d& x) {
    return Eigen::Vector3d(x(0) * x(0), std::sqrt(2.0) * x(0) * x(1), x(1) * x(1));
}

Eigen::MatrixXd combination(const alignment::KernelBank& bank, const Eigen::VectorXd& w) {
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(bank.base_grams[0].rows(), bank.base_grams[0].cols());
    for (std::size_t i = 0; i < bank.size(); ++i) k += w(static_cast<Eigen::Index>(i)) * bank.base_grams[i];
    return k;
}

std::vector<KernelSpec> random_rbf_bank(std::mt19937_64& rng, int m) {
    std::uniform_real_distribution<double> logs(-1.5, 1.5);
    std::vector<KernelSpec> specs;
    for (int i = 0; i < m; ++i) specs.push_back(KernelSpec::scaled_rbf(std::pow(10.0, logs(rng))));
    return specs;
}

}  // namespace

TEST_CASE("make_bank normalizes every Gram") {
    std::mt19937_64 rng(1);
    const Eigen::MatrixXd x = testing::random_matrix(rng, 12, 3);
    const auto bank = alignment::make_bank(kernel::rbf_bank({0.1, 1.0, 10.0}), x);
    CHECK(bank.normalized);
    for (const auto& g : bank.base_grams) CHECK(std::abs(g.norm() - 1.0) <= 1e-10);
    const auto raw = alignment::make_bank(kernel::rbf_bank({1.0}), x, false);
    CHECK(!raw.normalized);
    CHECK(raw.base_grams[0] == kernel::gram(KernelSpec::scaled_rbf(1.0), x).values);
    CHECK_THROWS_AS(alignment::make_bank({}, x), InvalidArgument);
}

TEST_CASE("align_qp with one kernel") {
    std::mt19937_64 rng(2);
    const Eigen::MatrixXd x = testing::random_matrix(rng, 15, 2);
    const auto y = testing::random_labels(rng, 15, 2);
    const auto ideal = kernel::ideal_kernel(y, 2);
    const auto bank = alignment::make_bank({KernelSpec::scaled_rbf(0.5)}, x);
    const auto sol = alignment::align_qp(bank, ideal);
    const double b1 = kernel::frobenius_inner(bank.base_grams[0], ideal.values);
    CHECK(sol.weights(0) == doctest::Approx(1.0 / b1));
    CHECK(sol.achieved_alignment == doctest::Approx(kernel::alignment(bank.base_grams[0], ideal.values)));
    CHECK(sol.method == alignment::AlignMethod::qp);
    // The combined spec reproduces the weighted normalized Gram.
    CHECK((kernel::gram(sol.combined, x).values - sol.weights(0) * bank.base_grams[0]).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("align_qp reaches alignment 1 when the ideal kernel is in the bank") {
    std::mt19937_64 rng(3);
    const Eigen::Index n = 10;
    const auto y = testing::random_labels(rng, n, 2);
    const auto ideal = kernel::ideal_kernel(y, 2);
    // The ideal kernel is the linear kernel of the one-dimensional +-1 labels.
    Eigen::MatrixXd x(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) x(i, 0) = y[static_cast<std::size_t>(i)] == 0 ? 1.0 : -1.0;
    std::vector<KernelSpec> specs = kernel::rbf_bank({0.2, 0.7, 3.0});
    specs.push_back(KernelSpec::linear());
    const auto bank = alignment::make_bank(specs, x);
    REQUIRE((bank.base_grams.back() * std::sqrt(static_cast<double>(n * n)) - ideal.values).norm() <= 1e-12);
    const auto sol = alignment::align_qp(bank, ideal);
    CHECK(sol.achieved_alignment >= 1.0 - 1e-6);
    CHECK(sol.weights(3) > 0.0);

    // Brute-force grid search over the simplex confirms nothing beats 1.
    double best = -1.0;
    for (int a = 0; a <= 10; ++a)
        for (int b = 0; a + b <= 10; ++b)
            for (int c = 0; a + b + c <= 10; ++c) {
                Eigen::Vector4d w(a, b, c, 10 - a - b - c);
                const Eigen::MatrixXd k = combination(bank, w / 10.0);
                best = std::max(best, kernel::alignment(k, ideal.values));
            }
    CHECK(best == doctest::Approx(1.0));
    CHECK(sol.achieved_alignment >= best - 1e-6);
}

TEST_CASE("align_qp with duplicate kernels matches the single kernel") {
    std::mt19937_64 rng(4);
    const Eigen::MatrixXd x = testing::random_matrix(rng, 14, 3);
    const auto ideal = kernel::ideal_kernel(testing::random_labels(rng, 14, 3), 3);
    const auto single = alignment::align_qp(alignment::make_bank({KernelSpec::scaled_rbf(0.8)}, x), ideal);
    const auto twice = alignment::align_qp(
        alignment::make_bank({KernelSpec::scaled_rbf(0.8), KernelSpec::scaled_rbf(0.8)}, x), ideal);
    CHECK(twice.achieved_alignment == doctest::Approx(single.achieved_alignment).epsilon(1e-10));
    CHECK(twice.weights.sum() == doctest::Approx(single.weights(0)).epsilon(1e-8));
}

TEST_CASE("align_qp dominates every single base kernel") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
        const int m = 1 + t % 8;
        const Eigen::MatrixXd x = testing::random_matrix(rng, 16, 3);
        const auto y = testing::random_labels(rng, 16, 2 + t % 2);
        const auto ideal = kernel::ideal_kernel(y, 2 + t % 2);
        auto specs = random_rbf_bank(rng, m);
        if (t % 3 == 0) specs.push_back(KernelSpec::polynomial(2, 1.0));
        const auto bank = alignment::make_bank(specs, x);
        const auto sol = alignment::align_qp(bank, ideal);
        CHECK((sol.weights.array() >= 0.0).all());
        CHECK(sol.support_size() >= 1);
        for (const auto& g : bank.base_grams) CHECK(sol.achieved_alignment >= kernel::alignment(g, ideal.values) - 1e-6);
        CHECK(sol.solver_residual <= 1e-8);
    }
}

TEST_CASE("align_qp is invariant to scaling a base kernel") {
    std::mt19937_64 rng(6);
    const Eigen::MatrixXd x = testing::random_matrix(rng, 15, 2);
    const auto ideal = kernel::ideal_kernel(testing::random_labels(rng, 15, 2), 2);
    const auto bank = alignment::make_bank(kernel::rbf_bank({0.3, 1.0, 4.0}), x, false);
    auto scaled = bank;
    scaled.base_grams[1] *= 25.0;
    scaled.raw_norms[1] *= 25.0;
    const auto a = alignment::align_qp(bank, ideal);
    const auto b = alignment::align_qp(scaled, ideal);
    CHECK(b.achieved_alignment == doctest::Approx(a.achieved_alignment).epsilon(1e-9));
}

TEST_CASE("alignment with no positively aligned kernel is infeasible") {
    // Two points of different classes: Y = [[1,-1],[-1,1]]; an all-ones Gram
    // has <K, Y> = 0.
    const Eigen::MatrixXd x{{0.0}, {0.0}};
    const auto ideal = kernel::ideal_kernel({0, 1}, 2);
    const auto bank = alignment::make_bank({KernelSpec::scaled_rbf(1.0)}, x);
    CHECK_THROWS_AS(alignment::align_qp(bank, ideal), InfeasibleError);
    CHECK_THROWS_AS(alignment::align_lp(bank, ideal), InfeasibleError);
}

TEST_CASE("align_lp with one kernel matches the QP") {
    std::mt19937_64 rng(7);
    const Eigen::MatrixXd x = testing::random_matrix(rng, 12, 2);
    const auto ideal = kernel::ideal_kernel(testing::random_labels(rng, 12, 2), 2);
    const auto bank = alignment::make_bank({KernelSpec::scaled_rbf(0.6)}, x);
    const auto lp = alignment::align_lp(bank, ideal);
    const auto qp = alignment::align_qp(bank, ideal);
    CHECK(lp.weights(0) == doctest::Approx(qp.weights(0)));
    CHECK(lp.method == alignment::AlignMethod::lp);
}

TEST_CASE("align_lp on RBF banks picks the vertex minimizing s_i / b_i") {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 10; ++t) {
        const int m = 2 + t % 4;
        const Eigen::MatrixXd x = testing::random_matrix(rng, 14, 2);
        const auto ideal = kernel::ideal_kernel(testing::random_labels(rng, 14, 2), 2);
        const auto bank = alignment::make_bank(random_rbf_bank(rng, m), x);
        const auto sol = alignment::align_lp(bank, ideal);
        // Vertex enumeration: the feasible set {a >= 0, a^T b = 1} has vertices
        // e_i / b_i for b_i > 0, with cost s_i / b_i.
        double best = std::numeric_limits<double>::infinity();
        for (const auto& g : bank.base_grams) {
            const double b = kernel::frobenius_inner(g, ideal.values);
            if (b > 0.0) best = std::min(best, g.sum() / b);
        }
        const Eigen::MatrixXd k = combination(bank, sol.weights);
        CHECK(k.cwiseAbs().sum() == doctest::Approx(best).epsilon(1e-9));
        CHECK(kernel::frobenius_inner(k, ideal.values) == doctest::Approx(1.0));
        CHECK(k.norm() <= k.cwiseAbs().sum());
    }
}

TEST_CASE("align_lp on a five-kernel RBF bank is supported on one kernel") {
    std::mt19937_64 rng(9);
    const Eigen::MatrixXd x = testing::random_matrix(rng, 20, 3);
    const auto ideal = kernel::ideal_kernel(testing::random_labels(rng, 20, 2), 2);
    const auto bank = alignment::make_bank(kernel::rbf_bank({0.1, 0.5, 1.0, 5.0, 10.0}), x);
    const auto sol = alignment::align_lp(bank, ideal);
    CHECK(sol.support_size() == 1);
}

TEST_CASE("align_lp general path on a bank with negative entries") {
    std::mt19937_64 rng(10);
    int checked = 0;
    for (int t = 0; t < 6; ++t) {
        const Eigen::MatrixXd x = testing::random_matrix(rng, 8, 2);
        const auto ideal = kernel::ideal_kernel(testing::random_labels(rng, 8, 2), 2);
        const auto bank = alignment::make_bank({KernelSpec::linear(), KernelSpec::scaled_rbf(0.5)}, x);
        bool feasible = false;
        for (const auto& g : bank.base_grams) feasible = feasible || kernel::frobenius_inner(g, ideal.values) > 0.0;
        if (!feasible) continue;
        const auto sol = alignment::align_lp(bank, ideal);
        const Eigen::MatrixXd k = combination(bank, sol.weights);
        CHECK(kernel::frobenius_inner(k, ideal.values) == doctest::Approx(1.0));
        CHECK(k.norm() <= k.cwiseAbs().sum());
        // Grid oracle along the feasible segment between the two vertices.
        const double b0 = kernel::frobenius_inner(bank.base_grams[0], ideal.values);
        const double b1 = kernel::frobenius_inner(bank.base_grams[1], ideal.values);
        double best = std::numeric_limits<double>::infinity();
        for (int s = 0; s <= 2000; ++s) {
            const double u = s / 2000.0;
            // a0 b0 + a1 b1 = 1 along a0 = u * c, a1 = (1 - u) * c.
            const double denom = u * b0 + (1.0 - u) * b1;
            if (!(denom > 0.0)) continue;
            const Eigen::Vector2d w(u / denom, (1.0 - u) / denom);
            best = std::min(best, combination(bank, w).cwiseAbs().sum());
        }
        CHECK(k.cwiseAbs().sum() <= best + 1e-9);
        ++checked;
    }
    CHECK(checked >= 3);
}

TEST_CASE("unweighted_sum examples") {
    std::mt19937_64 rng(11);
    const Eigen::MatrixXd x = testing::random_matrix(rng, 10, 2);
    const auto specs = kernel::rbf_bank({0.5, 2.0, 8.0});
    const auto sum = alignment::unweighted_sum(specs);
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(10, 10);
    for (const auto& s : specs) expected += kernel::gram(s, x).values;
    CHECK((kernel::gram(sum, x).values - expected).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(alignment::unweighted_sum({KernelSpec::scaled_rbf(0.5)}) == KernelSpec::scaled_rbf(0.5));
    CHECK(alignment::unweighted_sum(alignment::make_bank(specs, x)) == sum);
}

TEST_CASE("block scaling maps unweighted features onto weighted-kernel features") {
    std::mt19937_64 rng(12);
    const Eigen::MatrixXd x = testing::random_matrix(rng, 9, 2);
    const double a1 = 4.0, a2 = 0.25;
    const auto k = KernelSpec::weighted_sum({{a1, KernelSpec::linear()}, {a2, KernelSpec::polynomial(2, 0.0)}});
    const Eigen::MatrixXd gram = kernel::gram(k, x).values;
    // phi'(x) = [phi1(x); phi2(x)] for k' = k1 + k2; B = diag(sqrt(a1) I, sqrt(a2) I).
    Eigen::VectorXd b(5);
    b << std::sqrt(a1), std::sqrt(a1), std::sqrt(a2), std::sqrt(a2), std::sqrt(a2);
    Eigen::MatrixXd mapped(9, 5);
    for (Eigen::Index i = 0; i < 9; ++i) {
        Eigen::VectorXd phi(5);
        phi << linear_features(x.row(i).transpose()), quadratic_features(x.row(i).transpose());
        mapped.row(i) = (b.asDiagonal() * phi).transpose();
    }
    CHECK((mapped * mapped.transpose() - gram).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("unweighted and weighted embeddings share the optimal trace objective") {
    // Features for k' = k1 + k2 are phi' = [phi1; phi2]; for k = 4 k1 + 0.25 k2
    // they are B phi'. A map a' under k' corresponds to a = a' B^{-1} under k
    // with the same objective, so min trace(a' L' a'^T) over ||a'||_F = 1
    // equals min trace(a L_k a^T) over ||a B||_F = 1, a generalized
    // eigenproblem L_k v = lambda B^2 v solved independently by Eigen.
    std::mt19937_64 rng(13);
    for (int t = 0; t < 5; ++t) {
        const Eigen::MatrixXd x = testing::random_matrix(rng, 12, 2);
        const auto y = testing::random_labels(rng, 12, 2);
        Eigen::MatrixXd phi(12, 5);
        for (Eigen::Index i = 0; i < 12; ++i)
            phi.row(i) << x.row(i), quadratic_features(x.row(i).transpose()).transpose();
        Eigen::VectorXd b(5);
        b << 2.0, 2.0, 0.5, 0.5, 0.5;
        const Eigen::MatrixXd weighted_phi = phi * b.asDiagonal();
        const auto k = KernelSpec::weighted_sum({{4.0, KernelSpec::linear()}, {0.25, KernelSpec::polynomial(2, 0.0)}});
        REQUIRE((weighted_phi * weighted_phi.transpose() - kernel::gram(k, x).values).cwiseAbs().maxCoeff() <= 1e-10);

        const auto g = learners::build_neighbor_graph(phi, y, 2, learners::GraphMode::dne);
        const Eigen::MatrixXd l_unweighted = learners::dne_laplacian_form(phi, g);
        const Eigen::MatrixXd l_weighted = learners::dne_laplacian_form(weighted_phi, g);
        const double unweighted_min = numerics::sym_eig(l_unweighted).eigenvalues(0);
        const Eigen::MatrixXd metric = b.array().square().matrix().asDiagonal();
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> gen(l_weighted, metric);
        REQUIRE(gen.info() == Eigen::Success);
        CHECK(gen.eigenvalues()(0) == doctest::Approx(unweighted_min).epsilon(1e-6));
    }
}
