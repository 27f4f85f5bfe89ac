#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "synthbench/dataset.hpp"
#include "synthbench/detectors.hpp"
#include "synthbench/generator.hpp"
#include "synthbench/ideal.hpp"
#include "synthbench/metrics.hpp"

namespace synthbench {

struct DatasetSpec {
    std::string id;
    std::string path;
    std::string label_column;
    std::string outlier_value;
};

struct BenchConfig {
    std::vector<DatasetSpec> datasets;
    std::vector<std::string> pairs = {"gauss_gauss", "vine_vine", "gauss_unif", "vine_unif",
                                      "unif_unif"};
    std::vector<std::string> detectors = {"lof_5", "lof_100", "wknn_5", "wknn_100", "iforest",
                                          "kde"};
    double xi = 0.05;
    int repeats = 1;
    std::uint64_t master_seed = 1;
    int workers = 1;
    bool include_real = true;
    bool raw_orientation_tau = false;  // keep detector orientations as produced
    bool dump_scores = true;
    GenParams gen;
};

// One benchmark cell: dataset x problem x pair x detector x repeat.
struct ExperimentResult {
    std::string dataset;
    std::string problem;  // "Real" or "Synth"
    std::string pair;     // "-" for Real rows
    std::string detector;
    int repeat = 0;
    std::uint64_t seed = 0;
    std::string status = "ok";
    std::size_t n = 0;
    std::size_t n_out = 0;
    MetricReport detector_metrics;
    bool has_ideals = false;
    TauResult tau_c, tau_rd, tau_od;
    MetricReport ideal_c, ideal_rd, ideal_od;
    TauResult ideal_tau_rd_od, ideal_tau_rd_c, ideal_tau_od_c;
    double wall_ms = 0.0;
};

// Fits the regular model to the jittered genuine regulars, derives the
// outlier model by the pair's modification and generates a fully synthetic
// dataset of the input's size with contamination xi, together with the ideal
// scorings of every generated instance.
struct SynthProblem {
    LabeledDataset data;
    IdealScores ideals;
    std::vector<GenerativeModel> models;  // [0] regular, [1] outlier
};

inline SynthProblem build_problem(const LabeledDataset& data, const GeneratorPair& pair,
                                  double xi, std::uint64_t seed, const GenParams& params) {
    if (!(xi > 0.0 && xi < 1.0)) throw std::invalid_argument("build_problem: xi must be in (0,1)");
    const std::vector<std::size_t> reg_idx = data.indices_of(Label::regular);
    if (reg_idx.size() < 30) {
        throw std::invalid_argument("build_problem: need at least 30 regular instances");
    }

    const LabeledDataset regulars = data.select(reg_idx);
    const LabeledDataset fitting =
        jitter(regulars, stable_hash64(seed, "jitter"), params.jitter_sd);
    const GenerativeModel reg_model =
        fit_model(pair.regular, fitting.instances, params, stable_hash64(seed, "fit"));
    const GenerativeModel out_model =
        derive_outlier_model(pair, reg_model, fitting.instances, params);

    const std::size_t n = data.n();
    const std::size_t n_out =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::round(xi * static_cast<double>(n))));
    const std::size_t n_reg =
        static_cast<std::size_t>(std::round((1.0 - xi) * static_cast<double>(n)));

    const Matrix synth_reg = reg_model.gen(n_reg, stable_hash64(seed, "gen_reg"));
    const Matrix synth_out = out_model.gen(n_out, stable_hash64(seed, "gen_out"));
    const Matrix all = Matrix::vstack(synth_reg, synth_out);

    SynthProblem out;
    out.data.instances = all;
    out.data.labels.assign(n_reg, Label::regular);
    out.data.labels.insert(out.data.labels.end(), n_out, Label::outlier);
    out.data.attribute_names = data.attribute_names;
    out.data.provenance = data.provenance;
    out.data.provenance.transforms.push_back("synth(" + pair.id + ")");

    const double xi_actual =
        static_cast<double>(n_out) / static_cast<double>(n_reg + n_out);
    out.ideals = ideal_scores(reg_model.logdens(all), out_model.logdens(all), xi_actual);
    out.models.push_back(reg_model);
    out.models.push_back(out_model);
    return out;
}

namespace bench_detail {

inline std::vector<double> aligned_scores(const ScoreVector& sv) {
    std::vector<double> s = sv.scores;
    if (sv.orientation == Orientation::lower_is_outlier) {
        for (double& x : s) x = -x;
    }
    return s;
}

struct Group {
    std::size_t dataset_idx = 0;
    std::string problem;
    std::string pair_id;  // "-" for Real
    int repeat = 0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> row_slots;  // one per detector, into the result table
};

inline std::string group_key(const std::string& ds, const std::string& problem,
                             const std::string& pair, int repeat) {
    return ds + "|" + problem + "|" + pair + "|" + std::to_string(repeat);
}

}  // namespace bench_detail

// Callback receives each completed group's assembled data, ideal scores
// (null for Real groups) and per-detector score vectors; used to persist
// per-run score files.
struct GroupScores {
    std::string dataset, problem, pair;
    int repeat = 0;
    const LabeledDataset* data = nullptr;
    const IdealScores* ideals = nullptr;
    std::vector<ScoreVector> detector_scores;
};
using GroupScoresSink = std::function<void(const GroupScores&)>;

// Runs the full experiment matrix. Groups (dataset x problem x pair x repeat)
// are independent jobs on a work queue; each assembles its data once and runs
// every detector on it. Results land in pre-assigned row slots, so the output
// order does not depend on the worker count. Cell failures are recorded in
// the status column and never abort the run.
inline std::vector<ExperimentResult> run_benchmark(
    const BenchConfig& config, const std::vector<std::pair<std::string, LabeledDataset>>& datasets,
    const GroupScoresSink& sink = nullptr) {
    if (datasets.empty()) throw std::invalid_argument("run_benchmark: no datasets");
    if (config.detectors.empty()) throw std::invalid_argument("run_benchmark: no detectors");
    for (const std::string& det : config.detectors) {
        if (!detector_registry().count(det)) {
            throw std::invalid_argument("run_benchmark: unknown detector " + det);
        }
    }
    std::vector<GeneratorPair> pairs;
    for (const std::string& id : config.pairs) pairs.push_back(parse_pair(id));

    // enumerate groups and rows
    std::vector<bench_detail::Group> groups;
    std::vector<ExperimentResult> rows;
    std::set<std::uint64_t> seen_seeds;
    auto derive_seed = [&](const std::string& key) {
        const std::uint64_t s = stable_hash64(config.master_seed, key);
        if (!seen_seeds.insert(s).second) {
            throw std::runtime_error("run_benchmark: seed collision on " + key);
        }
        return s;
    };

    for (std::size_t di = 0; di < datasets.size(); ++di) {
        const std::string& ds = datasets[di].first;
        for (int rep = 0; rep < config.repeats; ++rep) {
            std::vector<std::pair<std::string, std::string>> problem_pairs;
            if (config.include_real) problem_pairs.emplace_back("Real", "-");
            for (const GeneratorPair& p : pairs) problem_pairs.emplace_back("Synth", p.id);
            for (const auto& [problem, pair_id] : problem_pairs) {
                bench_detail::Group g;
                g.dataset_idx = di;
                g.problem = problem;
                g.pair_id = pair_id;
                g.repeat = rep;
                g.seed = derive_seed(bench_detail::group_key(ds, problem, pair_id, rep));
                for (const std::string& det : config.detectors) {
                    ExperimentResult row;
                    row.dataset = ds;
                    row.problem = problem;
                    row.pair = pair_id;
                    row.detector = det;
                    row.repeat = rep;
                    row.seed = derive_seed(
                        bench_detail::group_key(ds, problem, pair_id, rep) + "|" + det);
                    g.row_slots.push_back(rows.size());
                    rows.push_back(std::move(row));
                }
                groups.push_back(std::move(g));
            }
        }
    }

    std::mutex sink_mutex;
    auto run_group = [&](const bench_detail::Group& g) {
        const LabeledDataset& source = datasets[g.dataset_idx].second;
        LabeledDataset data;
        IdealScores ideals;
        bool has_ideals = false;
        std::string group_error;
        try {
            if (g.problem == "Real") {
                data = downsample_outliers(source, config.xi, stable_hash64(g.seed, "downsample"));
            } else {
                SynthProblem sp =
                    build_problem(source, parse_pair(g.pair_id), config.xi, g.seed, config.gen);
                data = std::move(sp.data);
                ideals = std::move(sp.ideals);
                has_ideals = true;
            }
        } catch (const std::exception& e) {
            group_error = e.what();
        }

        GroupScores gs;
        std::vector<double> c_al, rd_al, od_al;
        if (group_error.empty() && has_ideals) {
            c_al = bench_detail::aligned_scores(ideals.c);
            rd_al = bench_detail::aligned_scores(ideals.rd);
            od_al = bench_detail::aligned_scores(ideals.od);
        }

        for (std::size_t k = 0; k < g.row_slots.size(); ++k) {
            ExperimentResult& row = rows[g.row_slots[k]];
            const auto t0 = std::chrono::steady_clock::now();
            try {
                if (!group_error.empty()) throw std::runtime_error(group_error);
                row.n = data.n();
                row.n_out = data.count(Label::outlier);
                const ScoreVector scores =
                    detector_registry().at(row.detector)(data.instances, row.seed);
                row.detector_metrics = auc_pr_adjusted(scores, data.labels);
                row.detector_metrics.auc_roc = auc_roc(scores, data.labels);
                if (has_ideals) {
                    row.has_ideals = true;
                    const std::vector<double> det_al =
                        config.raw_orientation_tau ? scores.scores
                                                   : bench_detail::aligned_scores(scores);
                    row.tau_c = kendall_tau_b(det_al, c_al);
                    row.tau_rd = kendall_tau_b(det_al, rd_al);
                    row.tau_od = kendall_tau_b(det_al, od_al);
                    row.ideal_c = auc_pr_adjusted(ideals.c, data.labels);
                    row.ideal_c.auc_roc = auc_roc(ideals.c, data.labels);
                    row.ideal_rd = auc_pr_adjusted(ideals.rd, data.labels);
                    row.ideal_rd.auc_roc = auc_roc(ideals.rd, data.labels);
                    row.ideal_od = auc_pr_adjusted(ideals.od, data.labels);
                    row.ideal_od.auc_roc = auc_roc(ideals.od, data.labels);
                    row.ideal_tau_rd_od = kendall_tau_b(rd_al, od_al);
                    row.ideal_tau_rd_c = kendall_tau_b(rd_al, c_al);
                    row.ideal_tau_od_c = kendall_tau_b(od_al, c_al);
                }
                if (sink) gs.detector_scores.push_back(scores);
                row.status = "ok";
            } catch (const std::exception& e) {
                std::string msg = e.what();
                for (char& c : msg) {
                    if (c == ',' || c == '\n') c = ';';
                }
                row.status = "failed: " + msg;
            }
            const auto t1 = std::chrono::steady_clock::now();
            row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        }

        if (sink && group_error.empty()) {
            gs.dataset = datasets[g.dataset_idx].first;
            gs.problem = g.problem;
            gs.pair = g.pair_id;
            gs.repeat = g.repeat;
            gs.data = &data;
            gs.ideals = has_ideals ? &ideals : nullptr;
            std::lock_guard<std::mutex> lock(sink_mutex);
            sink(gs);
        }
    };

    const int workers = std::max(1, config.workers);
    if (workers == 1) {
        for (const auto& g : groups) run_group(g);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= groups.size()) return;
                    run_group(groups[i]);
                }
            });
        }
        for (std::thread& t : pool) t.join();
    }
    return rows;
}

// ---- results persistence ----------------------------------------------------

namespace bench_detail {

inline std::string fmt(double x) {
    if (std::isnan(x)) return "";
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

inline std::string fmt_tau(const TauResult& t) { return t.defined ? fmt(t.tau) : ""; }

}  // namespace bench_detail

inline const char* kResultsHeader =
    "dataset,problem,pair,detector,repeat,seed,status,n,n_out,"
    "auc_pr_adj,auc_pr_raw,auc_roc,"
    "kendall_tau_vs_c,kendall_tau_vs_rd,kendall_tau_vs_od,"
    "ideal_auc_pr_adj_c,ideal_auc_pr_adj_rd,ideal_auc_pr_adj_od,"
    "ideal_tau_rd_od,ideal_tau_rd_c,ideal_tau_od_c,wall_ms";

inline void write_results_csv(const std::string& path, const std::vector<ExperimentResult>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << kResultsHeader << "\n";
    for (const ExperimentResult& r : rows) {
        using bench_detail::fmt;
        using bench_detail::fmt_tau;
        out << r.dataset << ',' << r.problem << ',' << r.pair << ',' << r.detector << ','
            << r.repeat << ',' << r.seed << ',' << r.status << ',' << r.n << ',' << r.n_out << ',';
        if (r.status == "ok") {
            out << fmt(r.detector_metrics.auc_pr_adjusted) << ','
                << fmt(r.detector_metrics.auc_pr_raw) << ',' << fmt(r.detector_metrics.auc_roc)
                << ',';
            if (r.has_ideals) {
                out << fmt_tau(r.tau_c) << ',' << fmt_tau(r.tau_rd) << ',' << fmt_tau(r.tau_od)
                    << ',' << fmt(r.ideal_c.auc_pr_adjusted) << ','
                    << fmt(r.ideal_rd.auc_pr_adjusted) << ',' << fmt(r.ideal_od.auc_pr_adjusted)
                    << ',' << fmt_tau(r.ideal_tau_rd_od) << ',' << fmt_tau(r.ideal_tau_rd_c)
                    << ',' << fmt_tau(r.ideal_tau_od_c) << ',';
            } else {
                out << ",,,,,,,,,";
            }
        } else {
            out << ",,,,,,,,,,,,";
        }
        out << bench_detail::fmt(r.wall_ms) << "\n";
    }
}

inline std::vector<ExperimentResult> read_results_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty results file: " + path);
    if (line != kResultsHeader) throw std::runtime_error("unexpected results header in " + path);
    std::vector<ExperimentResult> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f = detail::split_csv_line(line);
        if (f.size() != 22) throw std::runtime_error("bad results row: " + line);
        ExperimentResult r;
        r.dataset = f[0];
        r.problem = f[1];
        r.pair = f[2];
        r.detector = f[3];
        r.repeat = std::stoi(f[4]);
        r.seed = std::stoull(f[5]);
        r.status = f[6];
        r.n = std::stoull(f[7]);
        r.n_out = std::stoull(f[8]);
        auto num = [&](std::size_t i) { return f[i].empty() ? kNan : std::stod(f[i]); };
        auto tau = [&](std::size_t i) {
            TauResult t;
            if (!f[i].empty()) {
                t.tau = std::stod(f[i]);
                t.defined = true;
            }
            return t;
        };
        r.detector_metrics.auc_pr_adjusted = num(9);
        r.detector_metrics.auc_pr_raw = num(10);
        r.detector_metrics.auc_roc = num(11);
        r.tau_c = tau(12);
        r.tau_rd = tau(13);
        r.tau_od = tau(14);
        r.ideal_c.auc_pr_adjusted = num(15);
        r.ideal_rd.auc_pr_adjusted = num(16);
        r.ideal_od.auc_pr_adjusted = num(17);
        r.has_ideals = !f[15].empty();
        r.ideal_tau_rd_od = tau(18);
        r.ideal_tau_rd_c = tau(19);
        r.ideal_tau_od_c = tau(20);
        r.wall_ms = f[21].empty() ? 0.0 : std::stod(f[21]);
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace synthbench
