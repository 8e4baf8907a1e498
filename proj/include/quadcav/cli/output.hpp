#pragma once

// CSV/JSON/gnuplot emission. Numbers use the shortest round-trip form.

#include <charconv>
#include <complex>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "quadcav/scan.hpp"

namespace quadcav::cli {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    if (res.ec != std::errc{}) return "nan";
    return {buf, res.ptr};
}

inline std::string fmt(long v) { return std::to_string(v); }
inline std::string fmt(std::size_t v) { return std::to_string(v); }
inline std::string fmt(bool v) { return v ? "1" : "0"; }

/// Comma-separated rows behind '#'-prefixed metadata lines.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const nlohmann::json& config, std::string_view kind)
        : path_(path), out_(path) {
        if (!out_) throw IoError("cannot open " + path.string() + " for writing");
        out_ << "# quadcav " << kind << "\n";
        out_ << "# config " << config.dump() << "\n";
    }

    void comment(std::string_view line) { out_ << "# " << line << "\n"; }

    void header(const std::vector<std::string>& cols) { row(cols); }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
        if (!out_) throw IoError("write failed on " + path_.string());
    }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

inline void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << doc.dump(2) << "\n";
    if (!out) throw IoError("write failed on " + path.string());
}

inline std::string csv_escape(std::string s) {
    for (auto& ch : s)
        if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
    return s;
}

inline const std::vector<std::string>& table_columns() {
    static const std::vector<std::string> cols{"i", "j", "axis1", "axis2", "lambda1", "lambda2", "theta", "label",
                                               "label_code", "theta1", "theta2", "alpha_abs", "mu", "converged",
                                               "growth", "by_criterion", "limit_cycle", "iterations", "diagnostic",
                                               "note"};
    return cols;
}

inline int label_code(PhaseLabel l) { return static_cast<int>(l); }

inline void write_table_csv(const std::filesystem::path& path, const PhaseTable& t, const nlohmann::json& config) {
    CsvWriter w(path, config, "phase-table");
    w.comment("axis1 " + t.first.name + " " + fmt(t.first.lo) + " " + fmt(t.first.hi) + " " + fmt(t.first.count));
    w.comment("axis2 " + t.second.name + " " + fmt(t.second.lo) + " " + fmt(t.second.hi) + " " + fmt(t.second.count));
    w.comment("label_code NP=0 DW1=1 DW2=2 MDW=3 UST=4");
    w.header(table_columns());
    for (std::size_t i = 0; i < t.first.count; ++i)
        for (std::size_t j = 0; j < t.second.count; ++j) {
            const auto& c = t.at(i, j);
            w.row({fmt(i), fmt(j), fmt(t.first.value(i)), fmt(t.second.value(j)), fmt(c.lambda1), fmt(c.lambda2),
                   fmt(c.theta), std::string(to_string(c.label)), std::to_string(label_code(c.label)), fmt(c.theta1),
                   fmt(c.theta2), fmt(c.alpha_abs), fmt(c.mu), fmt(c.converged), fmt(c.growth), fmt(c.by_criterion),
                   fmt(c.limit_cycle), fmt(c.iterations), fmt(c.diagnostic), csv_escape(c.note)});
        }
}

inline std::map<std::string, std::size_t> label_counts(const std::vector<CellRecord>& cells) {
    std::map<std::string, std::size_t> n;
    for (auto l : {PhaseLabel::NP, PhaseLabel::DW1, PhaseLabel::DW2, PhaseLabel::MDW, PhaseLabel::UST})
        n[std::string(to_string(l))] = 0;
    for (const auto& c : cells) ++n[std::string(to_string(c.label))];
    return n;
}

/// Label map rendered as an image from the table CSV (label_code column).
inline void write_label_gnuplot(const std::filesystem::path& gp, const std::string& csv_name, const PhaseTable& t) {
    std::ofstream out(gp);
    if (!out) throw IoError("cannot open " + gp.string() + " for writing");
    out << "# label map for " << csv_name << "\n"
        << "set datafile separator ','\n"
        << "set datafile commentschars '#'\n"
        << "set key off\n"
        << "set xlabel '" << t.first.name << "'\n"
        << "set ylabel '" << t.second.name << "'\n"
        << "set cbrange [-0.5:4.5]\n"
        << "set palette maxcolors 5 defined (0 '#f0f0f0', 1 '#1f77b4', 2 '#2ca02c', 3 '#ff7f0e', 4 '#d62728')\n"
        << "set cbtics ('NP' 0, 'DW1' 1, 'DW2' 2, 'MDW' 3, 'UST' 4)\n"
        << "set terminal pngcairo size 800,700\n"
        << "set output '" << csv_name << ".png'\n"
        << "plot '" << csv_name << "' every ::1 using 3:4:9 with image\n";
    if (!out) throw IoError("write failed on " + gp.string());
}

}  // namespace quadcav::cli
