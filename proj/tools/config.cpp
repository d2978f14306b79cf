#include "kmaha/cli.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace kmaha::cli {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void fail(int line, const std::string& msg) {
    throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

template <typename T>
T parse_number(const std::string& value, int line, const std::string& key) {
    T out{};
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end) fail(line, "invalid number '" + value + "' for " + key);
    return out;
}

bool parse_bool(const std::string& value, int line, const std::string& key) {
    if (value == "true" || value == "yes" || value == "1") return true;
    if (value == "false" || value == "no" || value == "0") return false;
    fail(line, "invalid boolean '" + value + "' for " + key);
}

std::vector<double> parse_sigmas(const std::string& value, int line) {
    std::vector<double> out;
    for (const auto& item : split_list(value)) {
        const double s = parse_number<double>(item, line, "sigmas");
        if (!(s > 0.0)) fail(line, "sigma values must be positive");
        out.push_back(s);
    }
    if (out.empty()) fail(line, "empty sigma list");
    return out;
}

std::vector<kernel::KernelSpec> parse_kernels(const std::string& value, int line) {
    std::vector<kernel::KernelSpec> out;
    for (const auto& item : split_list(value)) {
        try {
            out.push_back(kernel::KernelSpec::parse(item));
        } catch (const Error& e) {
            fail(line, e.what());
        }
    }
    if (out.empty()) fail(line, "empty kernel list");
    return out;
}

void set_method_key(eval::MethodConfig& m, const std::string& key, const std::string& value, int line) {
    try {
        if (key == "name") m.name = value;
        else if (key == "learner") m.learner = eval::parse_learner(value);
        else if (key == "kernelization") m.kernelization = eval::parse_kernelization(value);
        else if (key == "sigmas") m.candidates = kernel::rbf_bank(parse_sigmas(value, line));
        else if (key == "kernels") m.candidates = parse_kernels(value, line);
        else if (key == "folds") m.folds = parse_number<int>(value, line, key);
        else if (key == "max_dim") m.max_dim = parse_number<Eigen::Index>(value, line, key);
        else if (key == "dim") m.dim = parse_number<Eigen::Index>(value, line, key);
        else if (key == "k") m.k = parse_number<int>(value, line, key);
        else if (key == "k_nn") m.k_nn = parse_number<int>(value, line, key);
        else if (key == "c") m.lmnn.c = parse_number<double>(value, line, key);
        else if (key == "max_iterations") m.nca.max_iterations = m.lmnn.max_iterations = parse_number<int>(value, line, key);
        else if (key == "step_scale") m.lmnn.step_scale = parse_number<double>(value, line, key);
        else if (key == "tol") m.nca.tol = parse_number<double>(value, line, key);
        else fail(line, "unknown method key '" + key + "'");
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        fail(line, e.what());
    }
}

void validate(const RunConfig& c) {
    if (c.plan.repetitions < 1) throw ConfigError("repetitions must be >= 1");
    if (c.jobs < 1) throw ConfigError("jobs must be >= 1");
    if (c.k_nn < 1) throw ConfigError("k_nn must be >= 1");
    for (const auto& m : c.methods) {
        if (m.folds < 2) throw ConfigError("method " + m.label() + ": folds must be >= 2");
        if (m.k < 1) throw ConfigError("method " + m.label() + ": k must be >= 1");
        if (m.k_nn < 1) throw ConfigError("method " + m.label() + ": k_nn must be >= 1");
        if (m.max_dim && *m.max_dim < 1) throw ConfigError("method " + m.label() + ": max_dim must be >= 1");
        if (m.dim && *m.dim < 1) throw ConfigError("method " + m.label() + ": dim must be >= 1");
    }
    if (c.baseline) {
        bool found = false;
        for (const auto& m : c.methods) found = found || m.label() == *c.baseline;
        if (!found) throw ConfigError("baseline '" + *c.baseline + "' does not name a method");
    }
}

}  // namespace

std::vector<std::string> split_list(std::string_view text) {
    std::vector<std::string> out;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || (text[i] == ',' && depth == 0)) {
            auto item = trim(text.substr(start, i - start));
            if (!item.empty()) out.push_back(std::move(item));
            start = i + 1;
        } else if (text[i] == '(') {
            ++depth;
        } else if (text[i] == ')') {
            --depth;
        }
    }
    return out;
}

std::vector<kernel::KernelSpec> RunConfig::base_kernels() const {
    if (!bank.empty()) return bank;
    return kernel::rbf_bank(sigma_order());
}

std::vector<double> RunConfig::sigma_order() const {
    return sigmas.empty() ? kernel::default_sigma_grid() : sigmas;
}

bool RunConfig::synthetic() const { return dataset.rfind("synthetic:", 0) == 0; }

std::filesystem::path RunConfig::dataset_path() const {
    const std::filesystem::path p(dataset);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
    RunConfig c;
    c.base_dir = base_dir;
    eval::MethodConfig* method = nullptr;
    std::vector<bool> own_k_nn;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        const std::string s = trim(raw);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s != "[method]") fail(line, "unknown section '" + s + "'");
            c.methods.emplace_back();
            own_k_nn.push_back(false);
            method = &c.methods.back();
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) fail(line, "expected key = value");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (method) {
            if (key == "k_nn") own_k_nn.back() = true;
            set_method_key(*method, key, value, line);
            continue;
        }
        if (key == "dataset") c.dataset = value;
        else if (key == "label_column") {
            int idx = 0;
            const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), idx);
            if (ec == std::errc() && ptr == value.data() + value.size()) c.label_column = idx;
            else c.label_column = value;
        } else if (key == "n_per_class") c.n_per_class = parse_number<int>(value, line, key);
        else if (key == "noise") c.noise = parse_number<double>(value, line, key);
        else if (key == "seed") c.plan.seed = parse_number<std::uint64_t>(value, line, key);
        else if (key == "train_size") c.plan.train_size = parse_number<Eigen::Index>(value, line, key);
        else if (key == "repetitions") c.plan.repetitions = parse_number<int>(value, line, key);
        else if (key == "standardize") c.standardize = parse_bool(value, line, key);
        else if (key == "baseline") c.baseline = value;
        else if (key == "output") c.output = value;
        else if (key == "jobs") c.jobs = parse_number<int>(value, line, key);
        else if (key == "sigmas") c.sigmas = parse_sigmas(value, line);
        else if (key == "kernels") c.bank = parse_kernels(value, line);
        else if (key == "k_nn") c.k_nn = parse_number<int>(value, line, key);
        else if (key == "align_method") {
            if (value == "qp") c.align_method = alignment::AlignMethod::qp;
            else if (value == "lp") c.align_method = alignment::AlignMethod::lp;
            else fail(line, "align_method must be qp or lp");
        } else fail(line, "unknown key '" + key + "'");
    }
    // Methods without their own kernels use the global bank; the global
    // k_nn applies unless a method sets its own.
    for (std::size_t i = 0; i < c.methods.size(); ++i) {
        auto& m = c.methods[i];
        if (m.candidates.empty() && m.kernelized()) m.candidates = c.base_kernels();
        if (!own_k_nn[i]) m.k_nn = c.k_nn;
    }
    validate(c);
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.parent_path());
}

data::Dataset load_dataset(const RunConfig& config) {
    if (config.dataset.empty()) throw ConfigError("config does not name a dataset");
    if (config.synthetic()) {
        try {
            const auto kind = data::parse_synthetic_kind(config.dataset.substr(10));
            return data::make_synthetic(kind, config.n_per_class, config.noise, config.plan.seed);
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
    }
    const auto path = config.dataset_path();
    if (!std::filesystem::exists(path)) throw ConfigError("dataset file not found: " + path.string());
    try {
        data::CsvOptions options;
        options.label_column = config.label_column;
        return data::load_csv(path, options);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

}  // namespace kmaha::cli
