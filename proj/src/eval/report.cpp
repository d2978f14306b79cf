#include "kmaha/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace kmaha::eval {

namespace {

std::string fixed(double v, int digits) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

std::string mean_std(const ExperimentReport& r, std::size_t m) {
    if (std::isnan(r.mean[m])) return "failed";
    return fixed(r.mean[m], 2) + " ± " + fixed(r.std[m], 2);
}

std::string wdl(const ExperimentReport& r, std::size_t m) {
    if (!r.baseline || *r.baseline == m) return "-";
    const auto& c = r.win_draw_lose[m];
    return std::to_string(c.win) + "/" + std::to_string(c.draw) + "/" + std::to_string(c.lose);
}

// Display width; the plus-minus sign is two bytes in UTF-8.
std::size_t width(const std::string& s) {
    std::size_t w = 0;
    for (unsigned char ch : s) w += (ch & 0xC0) != 0x80 ? 1 : 0;
    return w;
}

std::string pad(const std::string& s, std::size_t w) { return s + std::string(w > width(s) ? w - width(s) : 0, ' '); }

}  // namespace

std::string format_table(const ExperimentReport& r) {
    const std::string wdl_header = r.baseline ? "W/D/L vs " + r.methods[*r.baseline] : "W/D/L";
    std::vector<std::vector<std::string>> rows{{"method", "accuracy", wdl_header, "failures"}};
    for (std::size_t m = 0; m < r.methods.size(); ++m)
        rows.push_back({r.methods[m], mean_std(r, m), wdl(r, m), std::to_string(r.failures[m])});
    std::vector<std::size_t> w(4, 0);
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c) w[c] = std::max(w[c], width(row[c]));

    std::ostringstream out;
    out << "dataset: " << (r.dataset.empty() ? "-" : r.dataset)
        << "  repetitions: " << r.per_split_accuracy.rows() << "\n";
    for (const auto& row : rows) {
        std::string line;
        for (std::size_t c = 0; c < row.size(); ++c) line += (c ? "  " : "") + pad(row[c], w[c]);
        line.erase(line.find_last_not_of(' ') + 1);
        out << line << "\n";
    }
    return out.str();
}

std::string format_tsv(const ExperimentReport& r) {
    std::ostringstream out;
    out << "dataset\tmethod\tmean\tstd\taccuracy\twin\tdraw\tlose\tfailures\n";
    for (std::size_t m = 0; m < r.methods.size(); ++m) {
        const bool has = r.baseline && *r.baseline != m;
        const auto& c = r.win_draw_lose[m];
        out << r.dataset << '\t' << r.methods[m] << '\t' << fixed(r.mean[m], 6) << '\t' << fixed(r.std[m], 6) << '\t'
            << mean_std(r, m) << '\t' << (has ? std::to_string(c.win) : "-") << '\t'
            << (has ? std::to_string(c.draw) : "-") << '\t' << (has ? std::to_string(c.lose) : "-") << '\t'
            << r.failures[m] << "\n";
    }
    return out.str();
}

std::string format_splits_tsv(const ExperimentReport& r) {
    std::ostringstream out;
    out << "repetition";
    for (const auto& m : r.methods) out << '\t' << m;
    out << "\n";
    for (Eigen::Index rep = 0; rep < r.per_split_accuracy.rows(); ++rep) {
        out << rep;
        for (Eigen::Index m = 0; m < r.per_split_accuracy.cols(); ++m)
            out << '\t' << fixed(r.per_split_accuracy(rep, m), 6);
        out << "\n";
    }
    return out.str();
}

std::string format_timing_tsv(const ExperimentReport& r) {
    std::ostringstream out;
    out << "method\tselection_seconds\n";
    for (std::size_t m = 0; m < r.methods.size(); ++m) out << r.methods[m] << '\t' << fixed(r.selection_seconds[m], 6) << "\n";
    return out.str();
}

std::string format_sweep_tsv(const SweepSeries& s) {
    std::ostringstream out;
    out << "kernels\tmean\tstd\n";
    for (std::size_t i = 0; i < s.kernel_counts.size(); ++i)
        out << s.kernel_counts[i] << '\t' << fixed(s.mean[i], 6) << '\t' << fixed(s.std[i], 6) << "\n";
    return out.str();
}

}  // namespace kmaha::eval
