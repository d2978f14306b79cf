// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include "kmaha/alignment.hpp"
#include "kmaha/data.hpp"
#include "kmaha/eval.hpp"
#include "kmaha/kernel.hpp"
#include "kmaha/kpca.hpp"
#include "kmaha/learners.hpp"
#include "kmaha/numerics.hpp"
#include "support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>

using namespace kmaha;
using eval::Kernelization;
using eval::Learner;
using kernel::KernelSpec;

namespace {

const std::string data_dir = KMAHA_DATA_DIR;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), format, a, b, c, d);
    return buf;
}

int jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// --- 1: NCA gradient ---------------------------------------------------------

Outcome nca_gradient() {
    std::mt19937_64 rng(101);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const Eigen::Index n = 6 + t % 10;
        const Eigen::Index D = 1 + t % 4;
        const Eigen::Index choices[3] = {1, std::min<Eigen::Index>(2, D), D};
        const Eigen::Index d = choices[t % 3];
        const Eigen::MatrixXd x = testing::random_matrix(rng, n, D);
        const auto y = testing::random_labels(rng, n, 2 + t % 2);
        const Eigen::MatrixXd a0 = testing::random_matrix(rng, d, D, 0.5);
        worst = std::max(worst, numerics::check_gradient(
                                    [&](const Eigen::MatrixXd& a) { return learners::nca_objective(a, x, y); },
                                    [&](const Eigen::MatrixXd& a) { return learners::nca_gradient(a, x, y); }, a0));
    }
    return {worst <= 1e-5, fmt("max relative error %.2e <= 1e-5 over 20 instances", worst)};
}

// --- 2: KPCA isometry --------------------------------------------------------

Outcome kpca_isometry() {
    std::mt19937_64 rng(102);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const Eigen::Index n = 20 + 2 * t;
        const Eigen::MatrixXd x = testing::random_matrix(rng, n, 2 + t % 3);
        for (const auto& spec : {KernelSpec::scaled_rbf(0.5), KernelSpec::scaled_rbf(1.0), KernelSpec::scaled_rbf(5.0),
                                 KernelSpec::polynomial(2, 1.0)}) {
            const auto m = kpca::kpca_fit(spec, x);
            const Eigen::MatrixXd k = kernel::gram(spec, x).values;
            const double scale = k.diagonal().maxCoeff();
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = i + 1; j < n; ++j) {
                    const double want = k(i, i) + k(j, j) - 2.0 * k(i, j);
                    const double got = (m.train_coordinates.row(i) - m.train_coordinates.row(j)).squaredNorm();
                    worst = std::max(worst, std::abs(got - want) / std::max(want, 1e-12 * scale));
                }
        }
    }
    return {worst <= 1e-8, fmt("max relative error %.2e <= 1e-8 over 20 datasets x 4 kernels", worst)};
}

// --- 3: kernel trick vs KPCA trick -------------------------------------------

Outcome representer_equivalence() {
    std::mt19937_64 rng(103);
    double worst = 0.0;
    int compared = 0;
    for (int t = 0; t < 60 && compared < 10; ++t) {
        const Eigen::Index n = 10 + 3 * (t % 10);
        const Eigen::MatrixXd x = testing::random_matrix(rng, n, 3);
        const auto y = testing::random_labels(rng, n, 2);
        const auto spec = KernelSpec::scaled_rbf(0.5);
        const Eigen::MatrixXd k = kernel::gram(spec, x).values;
        const auto model = kpca::kpca_fit(spec, x);
        if (model.rank() != n - 1) continue;
        const auto g = learners::build_neighbor_graph(model.train_coordinates, y, 2, learners::GraphMode::dne);
        const auto kpca_route = learners::dne_fit(model.train_coordinates, g, 1);
        // The kernel-trick span also contains the feature-space mean, an
        // eigenvalue-0 direction; instances with a nonnegative optimum are
        // not comparable.
        if (!(kpca_route.spectrum(0) < 0.0)) continue;
        const auto trick = learners::kdne_kernel_trick_fit(k, g, 1);
        worst = std::max(worst, std::abs(trick.objective - kpca_route.objective) / std::abs(kpca_route.objective));
        ++compared;
    }
    return {compared == 10 && worst <= 1e-6,
            fmt("max relative difference %.2e <= 1e-6 on %.0f instances", worst, compared)};
}

// --- 4: DNE optimality -------------------------------------------------------

Outcome dne_optimality() {
    std::mt19937_64 rng(104);
    double worst_gap = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < 10; ++t) {
        const Eigen::Index D = 3 + t % 4;
        const Eigen::Index d = 1 + t % 3;
        const Eigen::MatrixXd x = testing::random_matrix(rng, 25, D);
        const auto y = testing::random_labels(rng, 25, 2 + t % 2);
        const auto g = learners::build_neighbor_graph(x, y, 3, learners::GraphMode::dne);
        const auto fit = learners::dne_fit(x, g, d);
        const Eigen::MatrixXd l = learners::dne_laplacian_form(x, g);
        for (int p = 0; p < 100; ++p) {
            const Eigen::MatrixXd q = testing::random_orthonormal_rows(rng, d, D);
            worst_gap = std::max(worst_gap, fit.objective - (q * l * q.transpose()).trace());
        }
    }
    return {worst_gap <= 1e-8, fmt("max achieved - probe %.2e <= 1e-8 over 10 x 100 probes", worst_gap)};
}

// --- 5: alignment QP ---------------------------------------------------------

Outcome alignment_dominance() {
    std::mt19937_64 rng(105);
    std::uniform_real_distribution<double> logs(-1.5, 1.5);
    double worst_gap = -std::numeric_limits<double>::infinity();
    double worst_with_y = 1.0;
    for (int t = 0; t < 20; ++t) {
        const Eigen::Index n = 20;
        const int m = 1 + t % 8;
        const Eigen::MatrixXd x = testing::random_matrix(rng, n, 3);
        const auto y = testing::random_labels(rng, n, 2);
        const auto ideal = kernel::ideal_kernel(y, 2);
        std::vector<KernelSpec> specs;
        for (int i = 0; i < m; ++i) specs.push_back(KernelSpec::scaled_rbf(std::pow(10.0, logs(rng))));
        auto bank = alignment::make_bank(specs, x);
        const auto sol = alignment::align_qp(bank, ideal);
        double best = -1.0;
        for (const auto& g : bank.base_grams) best = std::max(best, kernel::alignment(g, ideal.values));
        worst_gap = std::max(worst_gap, best - sol.achieved_alignment);

        // Y itself as an extra base: the linear kernel of the +-1 labels.
        Eigen::MatrixXd signs(n, 1);
        for (Eigen::Index i = 0; i < n; ++i) signs(i, 0) = y[static_cast<std::size_t>(i)] == 0 ? 1.0 : -1.0;
        const auto y_bank = alignment::make_bank({KernelSpec::linear()}, signs);
        bank.base_specs.push_back(y_bank.base_specs[0]);
        bank.base_grams.push_back(y_bank.base_grams[0]);
        bank.raw_norms.push_back(y_bank.raw_norms[0]);
        worst_with_y = std::min(worst_with_y, alignment::align_qp(bank, ideal).achieved_alignment);
    }
    return {worst_gap <= 1e-6 && worst_with_y >= 0.999,
            fmt("max(best single - achieved) %.2e <= 1e-6; with Y min alignment %.6f >= 0.999", worst_gap,
                worst_with_y)};
}

// --- 6: block-scaling feature map --------------------------------------------

Outcome invertible_map() {
    std::mt19937_64 rng(106);
    const double a1 = 4.0, a2 = 0.25;
    const auto k = KernelSpec::weighted_sum({{a1, KernelSpec::linear()}, {a2, KernelSpec::polynomial(2, 0.0)}});
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
        const Eigen::MatrixXd x = testing::random_matrix(rng, 15, 2);
        Eigen::MatrixXd mapped(15, 5);
        for (Eigen::Index i = 0; i < 15; ++i) {
            const double u = x(i, 0), v = x(i, 1);
            // B [phi1; phi2] with phi1 = x and phi2 the degree-2 monomials.
            mapped.row(i) << std::sqrt(a1) * u, std::sqrt(a1) * v, std::sqrt(a2) * u * u,
                std::sqrt(a2) * std::sqrt(2.0) * u * v, std::sqrt(a2) * v * v;
        }
        worst = std::max(worst, (mapped * mapped.transpose() - kernel::gram(k, x).values).cwiseAbs().maxCoeff());
    }
    return {worst <= 1e-10, fmt("max entrywise difference %.2e <= 1e-10", worst)};
}

// --- 7-9: experiments ----------------------------------------------------------

struct ExperimentRun {
    Outcome outcome;
    std::string report;
};

std::string report_text(const eval::ExperimentReport& r) {
    return eval::format_table(r) + eval::format_tsv(r) + eval::format_splits_tsv(r);
}

ExperimentRun synthetic_nonlinearity() {
    const auto ds = data::make_synthetic(data::SyntheticKind::concentric_circles, 100, 0.05, 3);
    eval::MethodConfig dne;
    dne.learner = Learner::dne;
    dne.dim = 1;
    auto kdne = dne;
    kdne.kernelization = Kernelization::kpca_cv;
    kdne.candidates = {KernelSpec::polynomial(2, 1.0)};
    eval::ExperimentOptions options;
    options.dataset_name = "concentric-circles";
    options.baseline = 0;
    options.jobs = jobs();
    const auto r = eval::run_experiment(ds, {dne, kdne}, {7, 100, 10}, options);
    const bool pass = r.failures[0] == 0 && r.failures[1] == 0 && r.mean[0] <= 0.75 && r.mean[1] >= 0.95;
    return {{pass, fmt("linear DNE %.4f <= 0.75, KDNE poly(2,1) %.4f >= 0.95", r.mean[0], r.mean[1])}, report_text(r)};
}

eval::MethodConfig capped(Learner learner, Kernelization kz) {
    eval::MethodConfig m;
    m.learner = learner;
    m.kernelization = kz;
    // Runtime caps for the iterative learners; DNE is closed form.
    if (learner != Learner::dne) {
        m.max_dim = 20;
        m.nca.max_iterations = 50;
        m.lmnn.max_iterations = 50;
    }
    return m;
}

ExperimentRun uci_trends() {
    std::vector<eval::MethodConfig> methods;
    for (auto l : {Learner::nca, Learner::lmnn, Learner::dne}) {
        methods.push_back(capped(l, Kernelization::linear));
        methods.push_back(capped(l, Kernelization::kpca_cv));
    }
    data::CsvOptions csv;
    ExperimentRun run;
    run.outcome.pass = true;
    const struct {
        const char* name;
        Eigen::Index train;
    } sets[] = {{"iris", 100}, {"ionosphere", 200}};
    for (const auto& set : sets) {
        const auto ds = data::load_csv(data_dir + "/" + set.name + ".csv", csv);
        eval::ExperimentOptions options;
        options.dataset_name = set.name;
        options.jobs = jobs();
        const auto r = eval::run_experiment(ds, methods, {7, set.train, 10}, options);
        run.report += report_text(r);
        std::string detail = std::string(set.name) + ":";
        for (std::size_t i = 0; i < methods.size(); i += 2) {
            const bool ok = r.failures[i] == 0 && r.failures[i + 1] == 0 && r.mean[i + 1] >= r.mean[i] - 0.02;
            run.outcome.pass = run.outcome.pass && ok;
            detail += " " + r.methods[i + 1] + " " + fmt("%.4f", r.mean[i + 1]) + " vs " + r.methods[i] + " " +
                      fmt("%.4f", r.mean[i]) + (ok ? "" : " (below margin)") + ";";
        }
        if (std::string(set.name) == "ionosphere") {
            const double gap = r.mean[5] - r.mean[4];
            run.outcome.pass = run.outcome.pass && gap > 0.0;
            detail += fmt(" KDNE - DNE gap %+.4f > 0;", gap);
        }
        run.outcome.detail += (run.outcome.detail.empty() ? "" : " ") + detail;
    }
    return run;
}

ExperimentRun sweep_stability() {
    const auto ds = data::load_csv(data_dir + "/iris.csv");
    eval::ExperimentOptions options;
    options.dataset_name = "iris";
    options.jobs = jobs();
    const auto series = eval::base_kernel_sweep(ds, capped(Learner::dne, Kernelization::linear),
                                                kernel::default_sigma_grid(), {7, 100, 10}, options);
    const double diff = std::abs(series.mean[20] - series.mean[13]);
    bool failures = false;
    for (int f : series.report.failures) failures = failures || f != 0;
    return {{!failures && diff <= 0.03,
             fmt("|acc(m=21) - acc(m=14)| = |%.4f - %.4f| = %.4f <= 0.03", series.mean[20], series.mean[13], diff)},
            eval::format_sweep_tsv(series) + report_text(series.report)};
}

// --- 10: selection cost --------------------------------------------------------

Outcome selection_cost() {
    const auto ds = data::load_csv(data_dir + "/iris.csv");
    const std::vector<eval::MethodConfig> methods{capped(Learner::dne, Kernelization::kpca_unweighted),
                                                  capped(Learner::dne, Kernelization::kpca_aligned_qp),
                                                  capped(Learner::dne, Kernelization::kpca_cv)};
    eval::ExperimentOptions options;
    options.dataset_name = "iris";
    const auto r = eval::run_experiment(ds, methods, {7, 100, 10}, options);
    const double u = r.selection_seconds[0], q = r.selection_seconds[1], c = r.selection_seconds[2];
    return {2.0 * u <= q && 2.0 * q <= c && u < q && q < c,
            fmt("selection seconds: unweighted %.4f, aligned QP %.4f, cross validation %.4f (each >= 2x)", u, q, c)};
}

}  // namespace

int main() {
    int failed = 0;
    auto report = [&](int id, const Outcome& o, double seconds, double limit) {
        const bool in_time = limit <= 0.0 || seconds < limit;
        const bool pass = o.pass && in_time;
        failed += pass ? 0 : 1;
        std::string timing = fmt("%.1f s", seconds);
        if (limit > 0.0) timing += fmt(" < %.0f s", limit);
        std::printf("criterion %2d: %s  %s (%s)\n", id, pass ? "PASS" : "FAIL", o.detail.c_str(), timing.c_str());
        std::fflush(stdout);
    };
    auto timed = [&](int id, const std::function<Outcome()>& f, double limit) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto o = f();
        report(id, o, seconds_since(t0), limit);
    };
    auto timed_run = [&](int id, const std::function<ExperimentRun()>& f, double limit) {
        const auto t0 = std::chrono::steady_clock::now();
        auto r = f();
        report(id, r.outcome, seconds_since(t0), limit);
        return r.report;
    };

    timed(1, nca_gradient, 10.0);
    timed(2, kpca_isometry, 30.0);
    timed(3, representer_equivalence, 30.0);
    timed(4, dne_optimality, 0.0);
    timed(5, alignment_dominance, 0.0);
    timed(6, invertible_map, 0.0);
    const auto r7 = timed_run(7, synthetic_nonlinearity, 120.0);
    const auto r8 = timed_run(8, uci_trends, 1800.0);
    const auto r9 = timed_run(9, sweep_stability, 0.0);
    timed(10, selection_cost, 0.0);
    timed(
        11,
        [&] {
            const bool same7 = synthetic_nonlinearity().report == r7;
            const bool same8 = uci_trends().report == r8;
            const bool same9 = sweep_stability().report == r9;
            return Outcome{same7 && same8 && same9,
                           std::string("reruns of 7/8/9 byte-identical: ") + (same7 ? "yes" : "no") + "/" +
                               (same8 ? "yes" : "no") + "/" + (same9 ? "yes" : "no")};
        },
        0.0);
    std::printf("%d of 11 criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
