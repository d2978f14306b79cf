#include "kmaha/error.hpp"
#include "kmaha/eval.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

namespace kmaha::eval {

namespace {

// Stream offset keeping per-repetition fit seeds apart from the split streams.
constexpr std::uint64_t fit_stream = 1u << 24;

struct RepOutcome {
    std::vector<double> accuracy;
    std::vector<double> selection_seconds;
    std::vector<std::string> warnings;
};

RepOutcome run_repetition(const data::Dataset& ds, const std::vector<MethodConfig>& methods,
                          const data::SplitPlan& plan, const ExperimentOptions& options, int rep) {
    RepOutcome out;
    out.accuracy.assign(methods.size(), std::numeric_limits<double>::quiet_NaN());
    out.selection_seconds.assign(methods.size(), 0.0);
    const auto [train, test] = data::split(ds, plan, rep);
    const std::uint64_t seed = data::make_rng(plan.seed, fit_stream + static_cast<std::uint64_t>(rep))();
    KpcaCache cache;
    for (std::size_t m = 0; m < methods.size(); ++m) {
        try {
            const auto p = fit_pipeline(methods[m], train, FitOptions{options.standardize, seed, &cache});
            out.accuracy[m] = accuracy(p.predict(test.features, methods[m].k_nn), test.labels);
            out.selection_seconds[m] = p.selection_seconds;
        } catch (const InvalidArgument&) {
            throw;
        } catch (const Error& e) {
            out.warnings.push_back("repetition " + std::to_string(rep) + ", method " + methods[m].label() +
                                   ": fit failed, excluded: " + e.what());
        }
    }
    return out;
}

}  // namespace

ExperimentReport run_experiment(const data::Dataset& ds, const std::vector<MethodConfig>& methods,
                                const data::SplitPlan& plan, const ExperimentOptions& options) {
    if (methods.empty()) throw InvalidArgument("experiment: no methods");
    if (plan.repetitions < 1) throw InvalidArgument("experiment: repetitions must be >= 1");
    if (options.baseline && *options.baseline >= methods.size())
        throw InvalidArgument("experiment: baseline index out of range");
    ds.check_learnable();

    const auto reps = static_cast<std::size_t>(plan.repetitions);
    std::vector<RepOutcome> outcomes(reps);
    std::mutex log_mutex;
    auto log = [&](const std::string& msg) {
        if (!options.log) return;
        std::lock_guard lock(log_mutex);
        options.log(msg);
    };

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t rep; (rep = next.fetch_add(1)) < reps;) {
            try {
                outcomes[rep] = run_repetition(ds, methods, plan, options, static_cast<int>(rep));
                log("repetition " + std::to_string(rep) + " done");
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = reps;
            }
        }
    };
    const auto jobs = static_cast<std::size_t>(std::max(1, options.jobs));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < std::min(jobs, reps); ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    ExperimentReport report;
    report.dataset = options.dataset_name;
    report.baseline = options.baseline;
    for (const auto& m : methods) report.methods.push_back(m.label());
    const auto mc = methods.size();
    report.per_split_accuracy.resize(static_cast<Eigen::Index>(reps), static_cast<Eigen::Index>(mc));
    report.mean.assign(mc, std::numeric_limits<double>::quiet_NaN());
    report.std.assign(mc, std::numeric_limits<double>::quiet_NaN());
    report.failures.assign(mc, 0);
    report.selection_seconds.assign(mc, 0.0);
    report.win_draw_lose.assign(mc, WinDrawLose{});

    for (std::size_t rep = 0; rep < reps; ++rep) {
        for (std::size_t m = 0; m < mc; ++m) {
            report.per_split_accuracy(static_cast<Eigen::Index>(rep), static_cast<Eigen::Index>(m)) =
                outcomes[rep].accuracy[m];
            report.selection_seconds[m] += outcomes[rep].selection_seconds[m];
        }
        for (const auto& w : outcomes[rep].warnings) {
            report.warnings.push_back(w);
            log("warning: " + w);
        }
    }

    for (std::size_t m = 0; m < mc; ++m) {
        const auto col = report.per_split_accuracy.col(static_cast<Eigen::Index>(m));
        double sum = 0.0;
        int count = 0;
        for (Eigen::Index r = 0; r < col.size(); ++r) {
            if (std::isnan(col(r))) {
                ++report.failures[m];
                continue;
            }
            sum += col(r);
            ++count;
        }
        if (count == 0) continue;
        const double mean = sum / count;
        double ss = 0.0;
        for (Eigen::Index r = 0; r < col.size(); ++r)
            if (!std::isnan(col(r))) ss += (col(r) - mean) * (col(r) - mean);
        report.mean[m] = mean;
        report.std[m] = count > 1 ? std::sqrt(ss / (count - 1)) : 0.0;
    }

    if (report.baseline) {
        const auto b = static_cast<Eigen::Index>(*report.baseline);
        for (std::size_t m = 0; m < mc; ++m) {
            auto& wdl = report.win_draw_lose[m];
            for (Eigen::Index r = 0; r < report.per_split_accuracy.rows(); ++r) {
                const double a = report.per_split_accuracy(r, static_cast<Eigen::Index>(m));
                const double base = report.per_split_accuracy(r, b);
                if (std::isnan(a) || std::isnan(base)) continue;
                const auto ra = std::llround(a * 100.0);
                const auto rb = std::llround(base * 100.0);
                if (ra > rb) ++wdl.win;
                else if (ra < rb) ++wdl.lose;
                else ++wdl.draw;
            }
        }
    }
    return report;
}

SweepSeries base_kernel_sweep(const data::Dataset& ds, const MethodConfig& learner,
                              const std::vector<double>& sigma_order, const data::SplitPlan& plan,
                              const ExperimentOptions& options) {
    if (sigma_order.empty()) throw InvalidArgument("sweep: empty sigma order");
    std::vector<MethodConfig> methods;
    std::vector<double> prefix;
    for (double sigma : sigma_order) {
        prefix.push_back(sigma);
        MethodConfig m = learner;
        m.kernelization = Kernelization::kpca_unweighted;
        m.candidates = kernel::rbf_bank(prefix);
        m.name = "m=" + std::to_string(prefix.size());
        methods.push_back(std::move(m));
    }
    SweepSeries series;
    series.report = run_experiment(ds, methods, plan, options);
    for (std::size_t i = 0; i < methods.size(); ++i) {
        series.kernel_counts.push_back(static_cast<int>(i + 1));
        series.mean.push_back(series.report.mean[i]);
        series.std.push_back(series.report.std[i]);
    }
    return series;
}

}  // namespace kmaha::eval
