#include "kmaha/data.hpp"

#include "kmaha/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

namespace kmaha::data {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

bool parse_number(const std::string& cell, double& out) {
    if (cell.empty()) return false;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    if (*begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

}  // namespace

void Dataset::check_consistent() const {
    if (static_cast<Eigen::Index>(labels.size()) != features.rows())
        throw InvalidArgument("dataset: label count does not match row count");
    for (int y : labels)
        if (y < 0 || y >= class_count)
            throw InvalidArgument("dataset: label index out of range");
    if (!features.allFinite()) throw InvalidArgument("dataset: non-finite feature value");
}

void Dataset::check_learnable() const {
    check_consistent();
    if (size() < 2) throw InvalidArgument("dataset: need at least 2 examples");
    if (dim() < 1) throw InvalidArgument("dataset: need at least 1 feature");
    if (class_count < 2) throw InvalidArgument("dataset: need at least 2 classes");
}

Dataset Dataset::subset(std::span<const Eigen::Index> idx) const {
    Dataset out;
    out.features.resize(static_cast<Eigen::Index>(idx.size()), dim());
    out.labels.reserve(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        out.features.row(static_cast<Eigen::Index>(r)) = features.row(idx[r]);
        out.labels.push_back(labels[static_cast<std::size_t>(idx[r])]);
    }
    out.class_count = class_count;
    out.feature_names = feature_names;
    out.class_names = class_names;
    return out;
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open dataset file: " + path.string());

    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        rows.push_back(split_row(line));
    }
    if (rows.empty()) throw InvalidArgument("empty dataset file: " + path.string());

    const std::size_t columns = rows.front().size();
    if (columns < 2) throw InvalidArgument("dataset needs a label column and at least one feature");
    for (std::size_t r = 0; r < rows.size(); ++r)
        if (rows[r].size() != columns)
            throw InvalidArgument("row " + std::to_string(r + 1) + " has " +
                                  std::to_string(rows[r].size()) + " cells, expected " +
                                  std::to_string(columns));

    // A header exists when any non-label cell of the first row is not a number.
    auto first_row_numeric = [&](std::size_t label_idx) {
        double v = 0;
        for (std::size_t c = 0; c < columns; ++c)
            if (c != label_idx && !parse_number(rows.front()[c], v)) return false;
        return true;
    };

    std::size_t label_idx = 0;
    bool has_header = false;
    if (const int* idx = std::get_if<int>(&options.label_column)) {
        const long resolved = *idx < 0 ? static_cast<long>(columns) + *idx : *idx;
        if (resolved < 0 || resolved >= static_cast<long>(columns))
            throw InvalidArgument("label column index out of range");
        label_idx = static_cast<std::size_t>(resolved);
        has_header = !first_row_numeric(label_idx);
    } else {
        const auto& name = std::get<std::string>(options.label_column);
        const auto& header = rows.front();
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw InvalidArgument("label column not found: " + name);
        label_idx = static_cast<std::size_t>(it - header.begin());
        has_header = true;
    }

    Dataset ds;
    const std::size_t first_data = has_header ? 1 : 0;
    const auto n = static_cast<Eigen::Index>(rows.size() - first_data);
    if (n == 0) throw InvalidArgument("empty dataset file: " + path.string());
    const auto d = static_cast<Eigen::Index>(columns - 1);
    ds.features.resize(n, d);
    for (std::size_t c = 0; c < columns; ++c) {
        if (c == label_idx) continue;
        ds.feature_names.push_back(has_header ? rows.front()[c] : "x" + std::to_string(c));
    }

    std::map<std::string, int> codes;
    for (std::size_t k = 0; k < options.known_classes.size(); ++k)
        codes.emplace(options.known_classes[k], static_cast<int>(k));
    ds.class_names = options.known_classes;

    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& row = rows[first_data + static_cast<std::size_t>(r)];
        Eigen::Index col = 0;
        for (std::size_t c = 0; c < columns; ++c) {
            if (c == label_idx) continue;
            double v = 0;
            if (!parse_number(row[c], v) || !std::isfinite(v))
                throw InvalidArgument("non-numeric feature at row " +
                                      std::to_string(first_data + r + 1) + ", column " +
                                      std::to_string(c + 1));
            ds.features(r, col++) = v;
        }
        const std::string& label = row[label_idx];
        auto it = codes.find(label);
        if (it == codes.end()) {
            if (!options.known_classes.empty())
                throw InvalidArgument("unknown class label: " + label);
            it = codes.emplace(label, static_cast<int>(ds.class_names.size())).first;
            ds.class_names.push_back(label);
        }
        ds.labels.push_back(it->second);
    }
    ds.class_count = static_cast<int>(ds.class_names.size());
    if (options.known_classes.empty() && ds.class_count < 2)
        throw InvalidArgument("dataset has a single class: " + path.string());
    ds.check_consistent();
    return ds;
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& x) {
    Standardizer s;
    const auto n = static_cast<double>(x.rows());
    s.mean = x.colwise().mean().transpose();
    s.scale.resize(x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const double var = (x.col(c).array() - s.mean(c)).square().sum() / n;
        s.scale(c) = std::sqrt(var);
    }
    return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& x) const {
    if (x.cols() != mean.size()) throw InvalidArgument("standardize: feature dimension mismatch");
    Eigen::MatrixXd out(x.rows(), x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        // Constant columns (and numerically constant ones) map to zero.
        if (scale(c) <= 1e-12 * std::max(1.0, std::abs(mean(c))))
            out.col(c).setZero();
        else
            out.col(c) = (x.col(c).array() - mean(c)) / scale(c);
    }
    return out;
}

Dataset Standardizer::apply(const Dataset& ds) const {
    Dataset out = ds;
    out.features = apply(ds.features);
    return out;
}

Dataset standardize(const Dataset& ds) {
    if (ds.size() < 2) throw InvalidArgument("standardize: need at least 2 examples");
    return Standardizer::fit(ds.features).apply(ds);
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32), 0x6b6d6168u};
    return std::mt19937_64(seq);
}

SplitIndices split_indices(const Dataset& ds, const SplitPlan& plan, int rep) {
    const Eigen::Index n = ds.size();
    if (plan.train_size >= n) throw InvalidArgument("split: train_size must be smaller than n");
    if (plan.train_size < 1) throw InvalidArgument("split: train_size must be positive");
    if (plan.repetitions < 1) throw InvalidArgument("split: repetitions must be >= 1");
    if (rep < 0 || rep >= plan.repetitions) throw InvalidArgument("split: rep out of range");

    std::vector<bool> present(static_cast<std::size_t>(ds.class_count), false);
    for (int y : ds.labels) present[static_cast<std::size_t>(y)] = true;
    const auto classes_present = std::count(present.begin(), present.end(), true);
    if (plan.train_size < classes_present)
        throw InvalidArgument("split: train_size smaller than the number of classes");

    auto rng = make_rng(plan.seed, static_cast<std::uint64_t>(rep));
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    constexpr int max_attempts = 10000;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        std::iota(perm.begin(), perm.end(), Eigen::Index{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<bool> seen(present.size(), false);
        for (Eigen::Index i = 0; i < plan.train_size; ++i)
            seen[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(perm[i])])] = true;
        if (seen == present) {
            SplitIndices out;
            out.train.assign(perm.begin(), perm.begin() + plan.train_size);
            out.test.assign(perm.begin() + plan.train_size, perm.end());
            return out;
        }
    }
    throw InvalidArgument("split: could not draw a training set containing every class");
}

std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitPlan& plan, int rep) {
    const auto idx = split_indices(ds, plan, rep);
    return {ds.subset(idx.train), ds.subset(idx.test)};
}

SyntheticKind parse_synthetic_kind(std::string_view name) {
    if (name == "concentric-circles") return SyntheticKind::concentric_circles;
    if (name == "interleaved-curves") return SyntheticKind::interleaved_curves;
    throw InvalidArgument("unknown synthetic dataset kind: " + std::string(name));
}

Dataset make_synthetic(SyntheticKind kind, int n_per_class, double noise, std::uint64_t seed) {
    if (n_per_class < 2) throw InvalidArgument("make_synthetic: n_per_class must be >= 2");
    if (!(noise >= 0.0)) throw InvalidArgument("make_synthetic: noise must be >= 0");

    auto rng = make_rng(seed, 0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Dataset ds;
    ds.features.resize(2 * n_per_class, 2);
    ds.class_count = 2;
    ds.feature_names = {"x", "y"};
    ds.class_names = {"0", "1"};
    for (int c = 0; c < 2; ++c) {
        for (int i = 0; i < n_per_class; ++i) {
            const Eigen::Index r = c * n_per_class + i;
            const double u = unit(rng);
            const double e = noise * gauss(rng);
            if (kind == SyntheticKind::concentric_circles) {
                const double angle = 2.0 * std::numbers::pi * u;
                const double radius = (c == 0 ? 1.0 : 2.0) + e;
                ds.features(r, 0) = radius * std::cos(angle);
                ds.features(r, 1) = radius * std::sin(angle);
            } else {
                // Two copies of one sine arc, the second shifted up by 1.
                const double t = 2.0 * std::numbers::pi * u;
                ds.features(r, 0) = t;
                ds.features(r, 1) = std::sin(t) + (c == 0 ? 0.0 : 1.0) + e;
            }
            ds.labels.push_back(c);
        }
    }
    return ds;
}

}  // namespace kmaha::data
