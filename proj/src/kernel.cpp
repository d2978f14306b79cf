#include "kmaha/kernel.hpp"

#include "kmaha/error.hpp"

#include <charconv>
#include <cmath>

namespace kmaha::kernel {

namespace {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    KernelSpec parse_all() {
        KernelSpec spec = parse_spec();
        skip_ws();
        if (pos_ != text_.size()) fail("trailing characters");
        return spec;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw InvalidArgument("kernel spec '" + std::string(text_) + "': " + what);
    }

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }

    bool consume(std::string_view token) {
        skip_ws();
        if (text_.substr(pos_, token.size()) == token) {
            pos_ += token.size();
            return true;
        }
        return false;
    }

    void expect(std::string_view token) {
        if (!consume(token)) fail("expected '" + std::string(token) + "'");
    }

    double number() {
        skip_ws();
        double v = 0.0;
        const char* begin = text_.data() + pos_;
        const char* end = text_.data() + text_.size();
        auto [ptr, ec] = std::from_chars(begin, end, v);
        if (ec != std::errc()) fail("expected a number");
        pos_ += static_cast<std::size_t>(ptr - begin);
        return v;
    }

    bool starts_with_number() {
        skip_ws();
        if (pos_ >= text_.size()) return false;
        const char c = text_[pos_];
        return (c >= '0' && c <= '9') || c == '.' || c == '-';
    }

    KernelSpec parse_spec() {
        if (consume("linear")) return KernelSpec::linear();
        if (consume("rbf")) {
            expect("(");
            const double sigma = number();
            expect(")");
            return KernelSpec::scaled_rbf(sigma);
        }
        if (consume("poly")) {
            expect("(");
            const double degree = number();
            double offset = 1.0;
            if (consume(",")) offset = number();
            expect(")");
            if (degree != std::floor(degree)) fail("polynomial degree must be an integer");
            return KernelSpec::polynomial(static_cast<int>(degree), offset);
        }
        if (consume("sum")) {
            expect("(");
            std::vector<std::pair<double, KernelSpec>> terms;
            do {
                double w = 1.0;
                if (starts_with_number()) {
                    w = number();
                    expect("*");
                }
                terms.emplace_back(w, parse_spec());
            } while (consume(","));
            expect(")");
            return KernelSpec::weighted_sum(terms);
        }
        fail("unknown kernel kind");
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

double eval_node(const KernelSpec& spec, double sqdist, double inner, Eigen::Index input_dim) {
    return std::visit(
        [&](const auto& node) -> double {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, ScaledRbf>) {
                return std::exp(-sqdist / (2.0 * static_cast<double>(input_dim) * node.sigma * node.sigma));
            } else if constexpr (std::is_same_v<T, Polynomial>) {
                return std::pow(inner + node.offset, node.degree);
            } else if constexpr (std::is_same_v<T, Linear>) {
                return inner;
            } else {
                double total = 0.0;
                for (const auto& term : node) total += term.weight * eval_node(term.spec, sqdist, inner, input_dim);
                return total;
            }
        },
        spec.node());
}

// Kernel values from precomputed squared distances and inner products.
Eigen::MatrixXd apply_kernel(const KernelSpec& spec, const Eigen::MatrixXd& sqdist,
                             const Eigen::MatrixXd& inner, Eigen::Index input_dim) {
    return std::visit(
        [&](const auto& node) -> Eigen::MatrixXd {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, ScaledRbf>) {
                const double denom = 2.0 * static_cast<double>(input_dim) * node.sigma * node.sigma;
                return (-sqdist.array() / denom).exp().matrix();
            } else if constexpr (std::is_same_v<T, Polynomial>) {
                return (inner.array() + node.offset).pow(static_cast<double>(node.degree)).matrix();
            } else if constexpr (std::is_same_v<T, Linear>) {
                return inner;
            } else {
                Eigen::MatrixXd total = Eigen::MatrixXd::Zero(sqdist.rows(), sqdist.cols());
                for (const auto& term : node) total += term.weight * apply_kernel(term.spec, sqdist, inner, input_dim);
                return total;
            }
        },
        spec.node());
}

void pairwise(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, Eigen::MatrixXd& sqdist,
              Eigen::MatrixXd& inner) {
    sqdist.resize(a.rows(), b.rows());
    inner.resize(a.rows(), b.rows());
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            sqdist(i, j) = (a.row(i) - b.row(j)).squaredNorm();
            inner(i, j) = a.row(i).dot(b.row(j));
        }
    }
}

}  // namespace

KernelSpec KernelSpec::scaled_rbf(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("scaled RBF: sigma must be > 0");
    return KernelSpec(ScaledRbf{sigma});
}

KernelSpec KernelSpec::polynomial(int degree, double offset) {
    if (degree < 1) throw InvalidArgument("polynomial kernel: degree must be >= 1");
    if (!(offset >= 0.0)) throw InvalidArgument("polynomial kernel: offset must be >= 0");
    return KernelSpec(Polynomial{degree, offset});
}

KernelSpec KernelSpec::linear() { return KernelSpec(Linear{}); }

KernelSpec KernelSpec::weighted_sum(const std::vector<std::pair<double, KernelSpec>>& terms) {
    if (terms.empty()) throw InvalidArgument("weighted sum kernel: no terms");
    Sum flat;
    for (const auto& [w, spec] : terms) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("weighted sum kernel: weights must be >= 0");
        if (const auto* inner = std::get_if<Sum>(&spec.node())) {
            for (const auto& t : *inner) flat.push_back({w * t.weight, t.spec});
        } else {
            flat.push_back({w, spec});
        }
    }
    return KernelSpec(std::move(flat));
}

std::string KernelSpec::to_string() const {
    return std::visit(
        [](const auto& node) -> std::string {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, ScaledRbf>) {
                return "rbf(" + format_double(node.sigma) + ")";
            } else if constexpr (std::is_same_v<T, Polynomial>) {
                return "poly(" + std::to_string(node.degree) + "," + format_double(node.offset) + ")";
            } else if constexpr (std::is_same_v<T, Linear>) {
                return "linear";
            } else {
                std::string out = "sum(";
                for (std::size_t i = 0; i < node.size(); ++i) {
                    if (i) out += ",";
                    out += format_double(node[i].weight) + "*" + node[i].spec.to_string();
                }
                return out + ")";
            }
        },
        node_);
}

KernelSpec KernelSpec::parse(std::string_view text) { return Parser(text).parse_all(); }

bool operator==(const KernelSpec& a, const KernelSpec& b) { return a.to_string() == b.to_string(); }

bool operator==(const SumTerm& a, const SumTerm& b) { return a.weight == b.weight && a.spec == b.spec; }

const std::vector<double>& default_sigma_grid() {
    static const std::vector<double> grid = {0.01, 0.025, 0.05, 0.075, 0.1, 0.25, 0.5,
                                             0.75, 1,     2.5,   5,     7.5,  10,   25,
                                             50,   75,    100,   250,   500,  750,  1000};
    return grid;
}

std::vector<KernelSpec> rbf_bank(const std::vector<double>& sigmas) {
    std::vector<KernelSpec> bank;
    bank.reserve(sigmas.size());
    for (double s : sigmas) bank.push_back(KernelSpec::scaled_rbf(s));
    return bank;
}

double eval_kernel(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y, Eigen::Index input_dim) {
    if (x.size() != y.size() || x.size() != input_dim)
        throw InvalidArgument("eval_kernel: dimension mismatch");
    return eval_node(spec, (x - y).squaredNorm(), x.dot(y), input_dim);
}

GramMatrix gram(const KernelSpec& spec, const Eigen::MatrixXd& points) {
    if (points.rows() < 1) throw InvalidArgument("gram: need at least one point");
    Eigen::MatrixXd sqdist;
    Eigen::MatrixXd inner;
    pairwise(points, points, sqdist, inner);
    Eigen::MatrixXd k = apply_kernel(spec, sqdist, inner, points.cols());
    // Mirror the upper triangle so the result is exactly symmetric.
    k.triangularView<Eigen::StrictlyLower>() = k.transpose().triangularView<Eigen::StrictlyLower>();
    return {std::move(k), spec};
}

GramMatrix gram(const KernelSpec& spec, const data::Dataset& ds) { return gram(spec, ds.features); }

Eigen::MatrixXd cross_gram(const KernelSpec& spec, const Eigen::MatrixXd& train,
                           const Eigen::MatrixXd& test) {
    if (train.cols() != test.cols()) throw InvalidArgument("cross_gram: dimension mismatch");
    Eigen::MatrixXd sqdist;
    Eigen::MatrixXd inner;
    pairwise(test, train, sqdist, inner);
    return apply_kernel(spec, sqdist, inner, train.cols());
}

GramMatrix frobenius_normalize(const GramMatrix& k) {
    const double norm = k.values.norm();
    if (!(norm > 0.0)) throw InvalidArgument("frobenius_normalize: zero matrix");
    return {k.values / norm, KernelSpec::weighted_sum({{1.0 / norm, k.spec}})};
}

IdealKernel ideal_kernel(const std::vector<int>& labels, int class_count) {
    if (class_count < 2) throw InvalidArgument("ideal_kernel: need at least 2 classes");
    const auto n = static_cast<Eigen::Index>(labels.size());
    const double off = -1.0 / static_cast<double>(class_count - 1);
    IdealKernel y;
    y.class_count = class_count;
    y.values.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            y.values(i, j) = labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)] ? 1.0 : off;
    return y;
}

double frobenius_inner(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw InvalidArgument("frobenius_inner: shape mismatch");
    return (a.array() * b.array()).sum();
}

double alignment(const Eigen::MatrixXd& k, const Eigen::MatrixXd& y) {
    const double nk = k.norm();
    const double ny = y.norm();
    if (!(nk > 0.0) || !(ny > 0.0)) throw InvalidArgument("alignment: zero-norm argument");
    return frobenius_inner(k, y) / (nk * ny);
}

}  // namespace kmaha::kernel
