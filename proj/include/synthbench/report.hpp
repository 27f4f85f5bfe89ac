#pragma once

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "synthbench/bench.hpp"

namespace synthbench {

struct SummaryRow {
    std::string group_a;  // pair (or "real")
    std::string group_b;  // detector or ideal-score name
    double mean = 0.0;
    double median = 0.0;
    std::size_t cells = 0;
};

struct BenchReport {
    std::vector<SummaryRow> detector_table;  // adjusted AUC PR per (pair, detector)
    std::vector<SummaryRow> ideal_table;     // adjusted AUC PR per (pair, ideal score)
    std::vector<SummaryRow> tau_table;       // mean Kendall tau per (score, score)
    std::size_t failed_cells = 0;
    std::size_t ok_cells = 0;
};

namespace report_detail {

struct Acc {
    std::vector<double> values;
    void add(double v) { values.push_back(v); }
    SummaryRow finish(const std::string& a, const std::string& b) const {
        SummaryRow r;
        r.group_a = a;
        r.group_b = b;
        r.cells = values.size();
        if (!values.empty()) {
            r.mean = mean(values);
            r.median = median(values);
        }
        return r;
    }
};

}  // namespace report_detail

inline BenchReport summarize(const std::vector<ExperimentResult>& rows) {
    BenchReport rep;
    std::map<std::pair<std::string, std::string>, report_detail::Acc> det, ideal, tau;
    for (const ExperimentResult& r : rows) {
        if (r.status != "ok") {
            ++rep.failed_cells;
            continue;
        }
        ++rep.ok_cells;
        const std::string pair = (r.problem == "Real") ? "real" : r.pair;
        det[{pair, r.detector}].add(r.detector_metrics.auc_pr_adjusted);
        if (r.has_ideals) {
            ideal[{pair, "C"}].add(r.ideal_c.auc_pr_adjusted);
            ideal[{pair, "RD"}].add(r.ideal_rd.auc_pr_adjusted);
            ideal[{pair, "OD"}].add(r.ideal_od.auc_pr_adjusted);
            if (r.tau_c.defined) tau[{r.detector, "C"}].add(r.tau_c.tau);
            if (r.tau_rd.defined) tau[{r.detector, "RD"}].add(r.tau_rd.tau);
            if (r.tau_od.defined) tau[{r.detector, "OD"}].add(r.tau_od.tau);
            if (r.ideal_tau_rd_od.defined) tau[{"RD", "OD"}].add(r.ideal_tau_rd_od.tau);
            if (r.ideal_tau_rd_c.defined) tau[{"RD", "C"}].add(r.ideal_tau_rd_c.tau);
            if (r.ideal_tau_od_c.defined) tau[{"OD", "C"}].add(r.ideal_tau_od_c.tau);
        }
    }
    for (const auto& [key, acc] : det) rep.detector_table.push_back(acc.finish(key.first, key.second));
    for (const auto& [key, acc] : ideal) rep.ideal_table.push_back(acc.finish(key.first, key.second));
    for (const auto& [key, acc] : tau) rep.tau_table.push_back(acc.finish(key.first, key.second));
    return rep;
}

namespace report_detail {

inline void write_table_csv(const std::string& path, const std::string& header,
                            const std::vector<SummaryRow>& table) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << header << "\n";
    for (const SummaryRow& r : table) {
        out << r.group_a << ',' << r.group_b << ',' << bench_detail::fmt(r.mean) << ','
            << bench_detail::fmt(r.median) << ',' << r.cells << "\n";
    }
}

inline void print_table(std::ostream& os, const std::string& title, const std::string& col_a,
                        const std::string& col_b, const std::vector<SummaryRow>& table) {
    os << title << "\n";
    os << std::left << std::setw(14) << col_a << std::setw(14) << col_b << std::right
       << std::setw(10) << "mean" << std::setw(10) << "median" << std::setw(8) << "cells"
       << "\n";
    for (const SummaryRow& r : table) {
        os << std::left << std::setw(14) << r.group_a << std::setw(14) << r.group_b << std::right
           << std::setw(10) << std::fixed << std::setprecision(4) << r.mean << std::setw(10)
           << r.median << std::setw(8) << r.cells << "\n";
    }
    os << "\n";
    os.unsetf(std::ios::fixed);
}

}  // namespace report_detail

// Writes the summary tables as CSV plus a human-readable text rendering.
inline void emit_report(const std::vector<ExperimentResult>& rows, const std::string& out_dir) {
    const BenchReport rep = summarize(rows);
    report_detail::write_table_csv(out_dir + "/report_detectors.csv",
                                   "pair,detector,mean_auc_pr_adj,median_auc_pr_adj,cells",
                                   rep.detector_table);
    report_detail::write_table_csv(out_dir + "/report_ideals.csv",
                                   "pair,score,mean_auc_pr_adj,median_auc_pr_adj,cells",
                                   rep.ideal_table);
    report_detail::write_table_csv(out_dir + "/report_correlation.csv",
                                   "score_a,score_b,mean_tau,median_tau,cells", rep.tau_table);

    std::ofstream txt(out_dir + "/report.txt");
    if (!txt) throw std::runtime_error("cannot write " + out_dir + "/report.txt");
    if (rep.ok_cells == 0) {
        txt << "WARNING: no successful cells; all " << rep.failed_cells << " cells failed\n";
    } else if (rep.failed_cells > 0) {
        txt << "note: " << rep.failed_cells << " cell(s) failed, " << rep.ok_cells << " ok\n\n";
    }
    report_detail::print_table(txt, "Adjusted AUC PR by generator pair and detector", "pair",
                               "detector", rep.detector_table);
    report_detail::print_table(txt, "Adjusted AUC PR of the ideal scorings", "pair", "score",
                               rep.ideal_table);
    report_detail::print_table(txt, "Mean Kendall tau between scorings", "score_a", "score_b",
                               rep.tau_table);
}

}  // namespace synthbench
