#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "synthbench/bench.hpp"
#include "synthbench/realness.hpp"
#include "synthbench/report.hpp"
#include "synthbench/serialize.hpp"

namespace synthbench {

inline constexpr const char* kVersion = "0.1.0";

inline BenchConfig bench_config_from_json(const nlohmann::json& j) {
    BenchConfig c;
    for (const auto& d : j.at("datasets")) {
        DatasetSpec spec;
        spec.path = d.at("path").get<std::string>();
        spec.label_column = d.at("label_column").get<std::string>();
        spec.outlier_value = d.at("outlier_value").get<std::string>();
        spec.id = d.value("id", std::filesystem::path(spec.path).stem().string());
        c.datasets.push_back(std::move(spec));
    }
    if (j.contains("pairs")) c.pairs = j.at("pairs").get<std::vector<std::string>>();
    if (j.contains("detectors")) c.detectors = j.at("detectors").get<std::vector<std::string>>();
    c.xi = j.value("xi", c.xi);
    c.repeats = j.value("repeats", c.repeats);
    c.master_seed = j.value("master_seed", c.master_seed);
    c.workers = j.value("workers", c.workers);
    c.include_real = j.value("include_real", c.include_real);
    c.raw_orientation_tau = j.value("raw_orientation_tau", c.raw_orientation_tau);
    c.dump_scores = j.value("dump_scores", c.dump_scores);
    c.gen.alpha = j.value("alpha", c.gen.alpha);
    c.gen.expansion = j.value("expansion", c.gen.expansion);
    c.gen.jitter_sd = j.value("jitter_sd", c.gen.jitter_sd);
    return c;
}

inline nlohmann::json bench_config_to_json(const BenchConfig& c) {
    nlohmann::json datasets = nlohmann::json::array();
    for (const DatasetSpec& d : c.datasets) {
        datasets.push_back({{"id", d.id},
                            {"path", d.path},
                            {"label_column", d.label_column},
                            {"outlier_value", d.outlier_value}});
    }
    return {{"datasets", datasets},
            {"pairs", c.pairs},
            {"detectors", c.detectors},
            {"xi", c.xi},
            {"repeats", c.repeats},
            {"master_seed", c.master_seed},
            {"workers", c.workers},
            {"include_real", c.include_real},
            {"raw_orientation_tau", c.raw_orientation_tau},
            {"dump_scores", c.dump_scores},
            {"alpha", c.gen.alpha},
            {"expansion", c.gen.expansion},
            {"jitter_sd", c.gen.jitter_sd}};
}

inline BenchConfig load_bench_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config: " + path);
    nlohmann::json j;
    in >> j;
    return bench_config_from_json(j);
}

inline std::vector<std::pair<std::string, LabeledDataset>> load_datasets(const BenchConfig& c) {
    std::vector<std::pair<std::string, LabeledDataset>> out;
    for (const DatasetSpec& spec : c.datasets) {
        LabeledDataset raw = load_csv(spec.path, spec.label_column, spec.outlier_value);
        LabeledDataset ready = preprocess(raw);
        for (const std::string& w : ready.warnings) {
            std::cerr << "[" << spec.id << "] warning: " << w << "\n";
        }
        out.emplace_back(spec.id, std::move(ready));
    }
    return out;
}

namespace runner_detail {

inline void write_manifest(const std::string& out_dir, const BenchConfig& config,
                           std::size_t row_count, const char* command) {
    nlohmann::json manifest = {{"tool", "synthbench"},
                               {"version", kVersion},
                               {"command", command},
                               {"master_seed", config.master_seed},
                               {"rows", row_count},
                               {"config", bench_config_to_json(config)}};
    std::ofstream out(out_dir + "/manifest.json");
    out << manifest.dump(2) << "\n";
}

// One scores file per benchmark cell group: ideal scorings next to every
// detector's raw scores.
inline GroupScoresSink make_scores_sink(const std::string& out_dir) {
    const std::string dir = out_dir + "/scores";
    std::filesystem::create_directories(dir);
    return [dir](const GroupScores& gs) {
        const std::string name = gs.dataset + "_" + gs.problem + "_" +
                                 (gs.pair == "-" ? std::string("real") : gs.pair) + "_r" +
                                 std::to_string(gs.repeat) + ".csv";
        std::ofstream out(dir + "/" + name);
        out << "instance,label";
        if (gs.ideals) out << ",logdens_reg,logdens_out,c,rd,od";
        for (const ScoreVector& sv : gs.detector_scores) out << ',' << sv.method_id;
        out << "\n";
        for (std::size_t i = 0; i < gs.data->n(); ++i) {
            out << i << ',' << (gs.data->labels[i] == Label::outlier ? "outlier" : "regular");
            if (gs.ideals) {
                out << ',' << bench_detail::fmt(gs.ideals->logdens_reg[i]) << ','
                    << bench_detail::fmt(gs.ideals->logdens_out[i]) << ','
                    << bench_detail::fmt(gs.ideals->c.scores[i]) << ','
                    << bench_detail::fmt(gs.ideals->rd.scores[i]) << ','
                    << bench_detail::fmt(gs.ideals->od.scores[i]);
            }
            for (const ScoreVector& sv : gs.detector_scores) {
                out << ',' << bench_detail::fmt(sv.scores[i]);
            }
            out << "\n";
        }
    };
}

}  // namespace runner_detail

// `bench run`: execute the matrix and persist results.csv, manifest.json and
// the per-group scores files under out_dir.
inline std::vector<ExperimentResult> run_benchmark_to_dir(
    const BenchConfig& config, const std::string& out_dir,
    const std::vector<std::pair<std::string, LabeledDataset>>& datasets) {
    std::filesystem::create_directories(out_dir);
    GroupScoresSink sink;
    if (config.dump_scores) sink = runner_detail::make_scores_sink(out_dir);
    const std::vector<ExperimentResult> rows = run_benchmark(config, datasets, sink);
    write_results_csv(out_dir + "/results.csv", rows);
    runner_detail::write_manifest(out_dir, config, rows.size(), "run");
    return rows;
}

// ---- realness ---------------------------------------------------------------

inline const char* kRealnessHeader =
    "dataset,problem,generator,variant,repeat,seed,kappa,kappa_drop,status";

struct RealnessRow {
    std::string dataset;
    int repeat = 0;
    RealnessResult result;
};

inline void write_realness_csv(const std::string& path, const std::vector<RealnessRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << kRealnessHeader << "\n";
    for (const RealnessRow& row : rows) {
        const RealnessResult& r = row.result;
        std::string status = r.ok ? "ok" : ("failed: " + r.note);
        for (char& c : status) {
            if (c == ',' || c == '\n') c = ';';
        }
        out << row.dataset << ',' << r.problem << ',' << r.generator_id << ',' << r.variant << ','
            << row.repeat << ',' << r.seed << ',';
        if (r.ok) {
            out << bench_detail::fmt(r.kappa) << ',' << bench_detail::fmt(r.kappa_drop);
        } else {
            out << ',';
        }
        out << ',' << status << "\n";
    }
}

// `bench realness`: Real baseline, random-guess reference and every
// (pair, problem, variant) replacement per dataset and repeat.
inline std::vector<RealnessRow> run_realness_to_dir(
    const BenchConfig& config, const std::string& out_dir,
    const std::vector<std::pair<std::string, LabeledDataset>>& datasets) {
    std::filesystem::create_directories(out_dir);
    RealnessOptions opt;
    opt.gen = config.gen;

    std::vector<RealnessRow> rows;
    auto push = [&rows](const std::string& id, int rep, RealnessResult r) {
        rows.push_back(RealnessRow{id, rep, std::move(r)});
    };
    for (const auto& [id, data] : datasets) {
        for (int rep = 0; rep < config.repeats; ++rep) {
            const std::uint64_t seed =
                stable_hash64(config.master_seed, "realness/" + id + "/" + std::to_string(rep));
            const GeneratorPair dummy = parse_pair("unif_unif");
            const RealnessResult real = classify_protocol(
                data, ProblemKind::real, dummy, OutlierVariant::characterizable, seed, opt);
            const double kappa_real = real.kappa;
            push(id, rep, real);
            push(id, rep, random_guess_baseline(data, seed, opt, &kappa_real));
            for (const std::string& pair_id : config.pairs) {
                const GeneratorPair pair = parse_pair(pair_id);
                push(id, rep,
                     classify_protocol(data, ProblemKind::synth_regular, pair,
                                       OutlierVariant::characterizable, seed, opt, &kappa_real));
                for (OutlierVariant v :
                     {OutlierVariant::characterizable, OutlierVariant::reconstructed}) {
                    push(id, rep,
                         classify_protocol(data, ProblemKind::synth_outliers, pair, v, seed, opt,
                                           &kappa_real));
                }
                push(id, rep,
                     classify_protocol(data, ProblemKind::synth, pair,
                                       OutlierVariant::characterizable, seed, opt, &kappa_real));
            }
        }
    }
    write_realness_csv(out_dir + "/realness.csv", rows);
    runner_detail::write_manifest(out_dir, config, rows.size(), "realness");
    return rows;
}

}  // namespace synthbench
