#include "kmaha/cli.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

namespace kmaha::cli {

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::string output;
    bool verbose = false;
    std::string method;
    std::string model;
    std::string data;
    std::string predictions;
};

struct Streams {
    std::ostream& out;
    std::ostream& err;
    bool verbose;

    void log(const std::string& msg) const {
        if (verbose) err << msg << '\n';
    }
};

std::string fmt(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    f << contents;
    if (!f) throw Error("failed writing " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open " + path.string());
    std::stringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

RunConfig load_with_overrides(const Flags& flags) {
    RunConfig c = load_config(flags.config);
    if (flags.seed) c.plan.seed = *flags.seed;
    if (flags.jobs) {
        if (*flags.jobs < 1) throw ConfigError("--jobs must be >= 1");
        c.jobs = *flags.jobs;
    }
    if (!flags.output.empty()) c.output = flags.output;
    return c;
}

void check_train_size(const RunConfig& c, const data::Dataset& ds) {
    if (c.plan.train_size < 1 || c.plan.train_size >= ds.size())
        throw ConfigError("train_size must be in [1, " + std::to_string(ds.size() - 1) + "] for this dataset");
}

std::optional<std::size_t> baseline_index(const RunConfig& c, const std::vector<eval::MethodConfig>& methods) {
    if (!c.baseline) return std::nullopt;
    for (std::size_t i = 0; i < methods.size(); ++i)
        if (methods[i].label() == *c.baseline) return i;
    throw ConfigError("baseline '" + *c.baseline + "' does not name a method");
}

/// Runs `prepare` (errors map to exit 2) and then `execute` (errors map to 3).
template <typename State>
int staged(const Streams& io, const std::function<State()>& prepare, const std::function<void(State&)>& execute) {
    std::optional<State> state;
    try {
        state.emplace(prepare());
    } catch (const std::exception& e) {
        io.err << "error: " << e.what() << '\n';
        return exit_config;
    }
    try {
        execute(*state);
    } catch (const std::exception& e) {
        io.err << "error: " << e.what() << '\n';
        return exit_runtime;
    }
    return exit_ok;
}

struct Prepared {
    RunConfig config;
    data::Dataset ds;
};

int cmd_fit(const Flags& flags, const Streams& io) {
    struct State {
        RunConfig config;
        data::Dataset ds;
        eval::MethodConfig method;
    };
    return staged<State>(
        io,
        [&] {
            State s{load_with_overrides(flags), {}, {}};
            s.ds = load_dataset(s.config);
            if (s.config.methods.empty()) throw ConfigError("config defines no [method] section");
            if (flags.method.empty()) {
                s.method = s.config.methods.front();
            } else {
                bool found = false;
                for (const auto& m : s.config.methods)
                    if (m.label() == flags.method) {
                        s.method = m;
                        found = true;
                        break;
                    }
                if (!found) throw ConfigError("no method named '" + flags.method + "'");
            }
            if (s.config.output.empty()) s.config.output = "model.json";
            return s;
        },
        [&](State& s) {
            io.log("fitting " + s.method.label() + " on " + std::to_string(s.ds.size()) + " examples");
            const auto p = eval::fit_pipeline(s.method, s.ds, {s.config.standardize, s.config.plan.seed, nullptr});
            for (std::size_t i = 0; i < p.objective_trace.size(); ++i)
                io.log("objective[" + std::to_string(i) + "] = " + fmt(p.objective_trace[i], 10));
            write_file(s.config.output, serialize_pipeline(p, s.config.label_column));
            io.out << "method: " << s.method.label() << '\n';
            if (p.kpca) io.out << "kernel: " << p.kpca->kernel.to_string() << '\n';
            io.out << "output dimension: " << p.transform.A.rows() << '\n';
            if (!p.objective_trace.empty()) io.out << "final objective: " << fmt(p.objective_trace.back(), 10) << '\n';
            io.out << "model written to " << s.config.output << '\n';
        });
}

int cmd_evaluate(const Flags& flags, const Streams& io) {
    struct State {
        LoadedModel model;
        data::Dataset ds;
    };
    return staged<State>(
        io,
        [&] {
            if (!std::filesystem::exists(flags.model)) throw ConfigError("model file not found: " + flags.model);
            State s{deserialize_pipeline(read_file(flags.model)), {}};
            if (!std::filesystem::exists(flags.data)) throw ConfigError("dataset file not found: " + flags.data);
            data::CsvOptions options;
            options.label_column = s.model.label_column;
            options.known_classes = s.model.pipeline.class_names;
            s.ds = data::load_csv(flags.data, options);
            return s;
        },
        [&](State& s) {
            const auto& p = s.model.pipeline;
            const auto predicted = p.predict(s.ds.features, p.config.k_nn);
            const double acc = eval::accuracy(predicted, s.ds.labels);
            io.out << "accuracy: " << fmt(acc) << '\n';
            if (!flags.predictions.empty()) {
                std::ostringstream f;
                f << "index\tpredicted\tactual\n";
                auto name = [&](int c) {
                    const auto uc = static_cast<std::size_t>(c);
                    return uc < p.class_names.size() ? p.class_names[uc] : std::to_string(c);
                };
                for (std::size_t i = 0; i < predicted.size(); ++i)
                    f << i << '\t' << name(predicted[i]) << '\t' << name(s.ds.labels[i]) << '\n';
                write_file(flags.predictions, f.str());
            }
        });
}

int cmd_experiment(const Flags& flags, const Streams& io) {
    return staged<Prepared>(
        io,
        [&] {
            Prepared s{load_with_overrides(flags), {}};
            s.ds = load_dataset(s.config);
            if (s.config.methods.empty()) throw ConfigError("config defines no [method] section");
            check_train_size(s.config, s.ds);
            if (s.config.output.empty()) s.config.output = "report";
            return s;
        },
        [&](Prepared& s) {
            eval::ExperimentOptions options;
            options.dataset_name = s.config.synthetic() ? s.config.dataset.substr(10)
                                                        : s.config.dataset_path().stem().string();
            options.standardize = s.config.standardize;
            options.baseline = baseline_index(s.config, s.config.methods);
            options.jobs = s.config.jobs;
            options.log = [&](const std::string& msg) { io.log(msg); };
            const auto report = eval::run_experiment(s.ds, s.config.methods, s.config.plan, options);
            for (const auto& w : report.warnings) io.err << "warning: " << w << '\n';
            const std::string prefix = s.config.output;
            write_file(prefix + ".txt", eval::format_table(report));
            write_file(prefix + ".tsv", eval::format_tsv(report));
            write_file(prefix + ".splits.tsv", eval::format_splits_tsv(report));
            write_file(prefix + ".timing.tsv", eval::format_timing_tsv(report));
            io.out << eval::format_table(report);
        });
}

int cmd_align(const Flags& flags, const Streams& io) {
    return staged<Prepared>(
        io,
        [&] {
            Prepared s{load_with_overrides(flags), {}};
            s.ds = load_dataset(s.config);
            s.ds.check_learnable();
            return s;
        },
        [&](Prepared& s) {
            const Eigen::MatrixXd x = s.config.standardize ? data::standardize(s.ds).features : s.ds.features;
            const auto bank = alignment::make_bank(s.config.base_kernels(), x);
            const auto ideal = kernel::ideal_kernel(s.ds.labels, s.ds.class_count);
            const auto sol = s.config.align_method == alignment::AlignMethod::qp ? alignment::align_qp(bank, ideal)
                                                                                 : alignment::align_lp(bank, ideal);
            double best_single = -1.0;
            std::ostringstream text;
            text << "kernel\tweight\talignment\n";
            for (std::size_t i = 0; i < bank.size(); ++i) {
                const double a = kernel::alignment(bank.base_grams[i], ideal.values);
                best_single = std::max(best_single, a);
                text << bank.base_specs[i].to_string() << '\t' << fmt(sol.weights(static_cast<Eigen::Index>(i)), 10)
                     << '\t' << fmt(a) << '\n';
            }
            text << "method: " << alignment::to_string(sol.method) << '\n'
                 << "achieved alignment: " << fmt(sol.achieved_alignment) << '\n'
                 << "best single alignment: " << fmt(best_single) << '\n'
                 << "support: " << sol.support_size() << " of " << bank.size() << '\n'
                 << "solver residual: " << fmt(sol.solver_residual, 12) << '\n'
                 << "combined kernel: " << sol.combined.to_string() << '\n';
            if (!s.config.output.empty()) write_file(s.config.output, text.str());
            io.out << text.str();
        });
}

int cmd_sweep(const Flags& flags, const Streams& io) {
    return staged<Prepared>(
        io,
        [&] {
            Prepared s{load_with_overrides(flags), {}};
            s.ds = load_dataset(s.config);
            check_train_size(s.config, s.ds);
            if (s.config.methods.empty()) s.config.methods.emplace_back();
            if (s.config.output.empty()) s.config.output = "sweep.tsv";
            return s;
        },
        [&](Prepared& s) {
            eval::ExperimentOptions options;
            options.standardize = s.config.standardize;
            options.jobs = s.config.jobs;
            options.log = [&](const std::string& msg) { io.log(msg); };
            const auto series =
                eval::base_kernel_sweep(s.ds, s.config.methods.front(), s.config.sigma_order(), s.config.plan, options);
            for (const auto& w : series.report.warnings) io.err << "warning: " << w << '\n';
            const auto tsv = eval::format_sweep_tsv(series);
            write_file(s.config.output, tsv);
            io.out << tsv;
        });
}

void add_common(CLI::App* cmd, Flags& flags) {
    cmd->add_option("--config", flags.config, "Run configuration file")->required();
    cmd->add_option("--seed", flags.seed, "Override the configured seed");
    cmd->add_option("--jobs", flags.jobs, "Maximum worker threads");
    cmd->add_option("--output", flags.output, "Output path (prefix for experiment reports)");
    cmd->add_flag("--verbose,-v", flags.verbose, "Log progress to stderr");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Kernelized Mahalanobis distance learning: fit, evaluate and compare metric learners"};
    app.require_subcommand(1);
    Flags flags;

    auto* fit = app.add_subcommand("fit", "Fit one configured method and write a model artifact");
    add_common(fit, flags);
    fit->add_option("--method", flags.method, "Name of the [method] to fit (default: the first)");

    auto* evaluate = app.add_subcommand("evaluate", "Classify a dataset with a fitted model");
    evaluate->add_option("--model", flags.model, "Model artifact")->required();
    evaluate->add_option("--data", flags.data, "CSV dataset")->required();
    evaluate->add_option("--predictions", flags.predictions, "Write per-point predictions here");
    evaluate->add_option("--config", flags.config, "Accepted for uniformity; unused");
    evaluate->add_option("--seed", flags.seed, "Accepted for uniformity; evaluation is deterministic");
    evaluate->add_option("--jobs", flags.jobs, "Accepted for uniformity; unused");
    evaluate->add_option("--output", flags.predictions, "Alias of --predictions");
    evaluate->add_flag("--verbose,-v", flags.verbose, "Log progress to stderr");

    auto* experiment = app.add_subcommand("experiment", "Repeated random split comparison of methods");
    add_common(experiment, flags);
    auto* align = app.add_subcommand("align", "Alignment-optimal combination of the base kernels");
    add_common(align, flags);
    auto* sweep = app.add_subcommand("sweep", "Unweighted-kernel accuracy versus number of base kernels");
    add_common(sweep, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_config;
    }

    const Streams io{out, err, flags.verbose};
    if (fit->parsed()) return cmd_fit(flags, io);
    if (evaluate->parsed()) return cmd_evaluate(flags, io);
    if (experiment->parsed()) return cmd_experiment(flags, io);
    if (align->parsed()) return cmd_align(flags, io);
    return cmd_sweep(flags, io);
}

}  // namespace kmaha::cli
