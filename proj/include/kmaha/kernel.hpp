#pragma once

#include "kmaha/data.hpp"

#include <Eigen/Core>

#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace kmaha::kernel {

struct ScaledRbf {
    /// k(x, y) = exp(-||x - y||^2 / (2 D sigma^2)), D the input dimension.
    double sigma = 1.0;
};

struct Polynomial {
    /// k(x, y) = (<x, y> + offset)^degree.
    int degree = 2;
    double offset = 1.0;
};

struct Linear {};

struct SumTerm;

/// A positive-semidefinite kernel function. Weighted sums are kept flat:
/// a sum never directly contains another sum.
class KernelSpec {
public:
    using Sum = std::vector<SumTerm>;
    using Node = std::variant<ScaledRbf, Polynomial, Linear, Sum>;

    KernelSpec() : node_(Linear{}) {}

    static KernelSpec scaled_rbf(double sigma);
    static KernelSpec polynomial(int degree, double offset = 1.0);
    static KernelSpec linear();
    /// Builds sum_i w_i k_i. Nested sums are flattened (weights multiply).
    static KernelSpec weighted_sum(const std::vector<std::pair<double, KernelSpec>>& terms);

    const Node& node() const { return node_; }
    bool is_sum() const { return std::holds_alternative<Sum>(node_); }

    /// Textual form, e.g. "rbf(0.5)", "poly(2,1)", "linear",
    /// "sum(2*rbf(0.5),1*linear)". Round-trips through parse().
    std::string to_string() const;
    static KernelSpec parse(std::string_view text);

    friend bool operator==(const KernelSpec& a, const KernelSpec& b);

private:
    explicit KernelSpec(Node node) : node_(std::move(node)) {}
    Node node_;
};

struct SumTerm {
    double weight = 1.0;
    KernelSpec spec;
};

bool operator==(const SumTerm& a, const SumTerm& b);

/// The scaled-RBF bank used in the experiments, in the order kernels are
/// added during the base-kernel sweep.
const std::vector<double>& default_sigma_grid();
std::vector<KernelSpec> rbf_bank(const std::vector<double>& sigmas);

/// k(x, y); `input_dim` is the D of the scaled RBF denominator.
double eval_kernel(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y, Eigen::Index input_dim);

struct GramMatrix {
    Eigen::MatrixXd values;
    KernelSpec spec;
};

/// Pairwise kernel values between the rows of `points` (n x D).
GramMatrix gram(const KernelSpec& spec, const Eigen::MatrixXd& points);
GramMatrix gram(const KernelSpec& spec, const data::Dataset& ds);

/// n_test x n_train; row r holds k(test_r, train_j) for all j.
Eigen::MatrixXd cross_gram(const KernelSpec& spec, const Eigen::MatrixXd& train,
                           const Eigen::MatrixXd& test);

/// Divides by the Frobenius norm and records the factor in the spec.
GramMatrix frobenius_normalize(const GramMatrix& k);

struct IdealKernel {
    /// +1 for same-label pairs, -1/(p-1) otherwise.
    Eigen::MatrixXd values;
    int class_count = 0;
};

IdealKernel ideal_kernel(const std::vector<int>& labels, int class_count);

double frobenius_inner(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// <K, Y>_F / (||K||_F ||Y||_F).
double alignment(const Eigen::MatrixXd& k, const Eigen::MatrixXd& y);

}  // namespace kmaha::kernel
