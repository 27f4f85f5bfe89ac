#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "synthbench/bench.hpp"
#include "synthbench/report.hpp"
#include "synthbench/rng.hpp"
#include "synthbench/runner.hpp"
#include "synthbench/serialize.hpp"

using namespace synthbench;

namespace {

LabeledDataset clustered_fixture(std::size_t n, std::size_t d, std::uint64_t seed) {
    LabeledDataset ds;
    ds.instances = Matrix(n, d);
    ds.labels.resize(n);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const bool outlier = (i % 12 == 0);
        for (std::size_t j = 0; j < d; ++j) {
            const double center = (i % 2 == 0) ? 0.3 : 0.7;
            ds.instances(i, j) =
                outlier ? rng.uniform01() : center + 0.07 * rng.normal();
        }
        ds.labels[i] = outlier ? Label::outlier : Label::regular;
    }
    for (std::size_t j = 0; j < d; ++j) ds.attribute_names.push_back("a" + std::to_string(j));
    return ds;
}

BenchConfig fast_config() {
    BenchConfig c;
    c.pairs = {"gauss_gauss", "unif_unif"};
    c.detectors = {"lof_5", "wknn_5", "iforest"};
    c.repeats = 2;
    c.master_seed = 17;
    c.gen.g_range = {1, 2, 3};
    c.dump_scores = false;
    return c;
}

std::vector<std::pair<std::string, LabeledDataset>> fixture_datasets() {
    return {{"alpha", clustered_fixture(160, 2, 1)}, {"beta", clustered_fixture(140, 3, 2)}};
}

// results comparison that ignores the wall-time column
std::vector<std::string> strip_wall(const std::string& path) {
    std::ifstream in(path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        const std::size_t cut = line.rfind(',');
        lines.push_back(line.substr(0, cut));
    }
    return lines;
}

}  // namespace

TEST_CASE("build_problem produces the requested mixture and scaled covariances") {
    const LabeledDataset ds = clustered_fixture(1000, 2, 3);
    BenchConfig c = fast_config();
    const SynthProblem sp = build_problem(ds, parse_pair("gauss_gauss"), 0.05, 99, c.gen);
    REQUIRE(sp.data.n() == 1000);
    REQUIRE(sp.data.count(Label::outlier) == 50);
    REQUIRE(sp.data.count(Label::regular) == 950);

    const GmmModel* reg = sp.models[0].as_gmm();
    const GmmModel* out = sp.models[1].as_gmm();
    REQUIRE(reg);
    REQUIRE(out);
    REQUIRE(reg->g() == out->g());
    for (std::size_t i = 0; i < reg->g(); ++i) {
        for (std::size_t k = 0; k < reg->dim(); ++k) {
            REQUIRE(out->components[i].var[k] ==
                    Catch::Approx(5.0 * reg->components[i].var[k]).margin(1e-12));
        }
    }
    REQUIRE(sp.ideals.xi == Catch::Approx(0.05));
    REQUIRE(sp.ideals.c.scores.size() == 1000);
}

TEST_CASE("build_problem guarantees at least one outlier") {
    const LabeledDataset ds = clustered_fixture(60, 2, 4);
    BenchConfig c = fast_config();
    const SynthProblem sp = build_problem(ds, parse_pair("unif_unif"), 0.001, 5, c.gen);
    REQUIRE(sp.data.count(Label::outlier) == 1);
}

TEST_CASE("build_problem preconditions") {
    BenchConfig c = fast_config();
    const LabeledDataset tiny = clustered_fixture(20, 2, 5);
    REQUIRE_THROWS_AS(build_problem(tiny, parse_pair("gauss_gauss"), 0.05, 1, c.gen),
                      std::invalid_argument);
    const LabeledDataset ds = clustered_fixture(100, 2, 6);
    REQUIRE_THROWS_AS(build_problem(ds, parse_pair("gauss_gauss"), 0.0, 1, c.gen),
                      std::invalid_argument);
}

TEST_CASE("unif_unif ideal scorings agree exactly") {
    const LabeledDataset ds = clustered_fixture(400, 2, 7);
    BenchConfig c = fast_config();
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
        const SynthProblem sp = build_problem(ds, parse_pair("unif_unif"), 0.05, seed, c.gen);
        const double a_c = auc_pr_adjusted(sp.ideals.c, sp.data.labels).auc_pr_adjusted;
        const double a_rd = auc_pr_adjusted(sp.ideals.rd, sp.data.labels).auc_pr_adjusted;
        const double a_od = auc_pr_adjusted(sp.ideals.od, sp.data.labels).auc_pr_adjusted;
        REQUIRE(std::abs(a_c - a_rd) <= 1e-9);
        REQUIRE(std::abs(a_c - a_od) <= 1e-9);
    }
}

TEST_CASE("run_benchmark fills the whole matrix deterministically") {
    const BenchConfig config = fast_config();
    const auto datasets = fixture_datasets();
    const std::vector<ExperimentResult> rows = run_benchmark(config, datasets);

    // 2 datasets x 2 repeats x (1 real + 2 pairs) x 3 detectors
    REQUIRE(rows.size() == 36);
    std::size_t synth = 0, real = 0;
    std::set<std::uint64_t> seeds;
    for (const ExperimentResult& r : rows) {
        (r.problem == "Synth" ? synth : real) += 1;
        seeds.insert(r.seed);
        REQUIRE(r.status == "ok");
        if (r.problem == "Synth") {
            REQUIRE(r.has_ideals);
            REQUIRE(r.n_out >= 1);
            REQUIRE(r.n_out <= static_cast<std::size_t>(std::round(0.05 * r.n)) + 1);
        } else {
            REQUIRE_FALSE(r.has_ideals);
        }
    }
    REQUIRE(synth == 24);
    REQUIRE(real == 12);
    REQUIRE(seeds.size() == rows.size());  // pairwise distinct cell seeds

    const std::vector<ExperimentResult> again = run_benchmark(config, datasets);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        REQUIRE(rows[i].seed == again[i].seed);
        REQUIRE(rows[i].detector_metrics.auc_pr_adjusted ==
                again[i].detector_metrics.auc_pr_adjusted);
    }
}

TEST_CASE("worker count does not change results") {
    BenchConfig config = fast_config();
    config.repeats = 1;
    const auto datasets = fixture_datasets();
    const auto serial = run_benchmark(config, datasets);
    config.workers = 4;
    const auto parallel = run_benchmark(config, datasets);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        REQUIRE(serial[i].detector == parallel[i].detector);
        REQUIRE(serial[i].detector_metrics.auc_pr_adjusted ==
                parallel[i].detector_metrics.auc_pr_adjusted);
        REQUIRE(serial[i].status == parallel[i].status);
    }
}

TEST_CASE("cell failures are isolated") {
    BenchConfig config = fast_config();
    config.pairs = {"gauss_gauss", "vine_vine"};
    config.repeats = 1;
    // single-attribute dataset: vine fit must fail, gauss must not
    LabeledDataset narrow = clustered_fixture(120, 1, 8);
    const std::vector<ExperimentResult> rows =
        run_benchmark(config, {{"narrow", narrow}});
    std::size_t ok = 0, failed = 0;
    for (const ExperimentResult& r : rows) {
        if (r.status == "ok") {
            ++ok;
        } else {
            ++failed;
            REQUIRE(r.pair == "vine_vine");
            REQUIRE(r.status.find("failed") == 0);
        }
    }
    REQUIRE(failed == 3);
    REQUIRE(ok == 6);
}

TEST_CASE("results csv round-trips and determinism holds end to end") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "synthbench_run_test";
    fs::remove_all(dir);
    BenchConfig config = fast_config();
    config.repeats = 1;
    config.dump_scores = true;
    const auto datasets = fixture_datasets();

    const auto rows1 = run_benchmark_to_dir(config, (dir / "a").string(), datasets);
    const auto rows2 = run_benchmark_to_dir(config, (dir / "b").string(), datasets);
    REQUIRE(strip_wall((dir / "a" / "results.csv").string()) ==
            strip_wall((dir / "b" / "results.csv").string()));
    REQUIRE(fs::exists(dir / "a" / "manifest.json"));
    REQUIRE(fs::exists(dir / "a" / "scores"));

    const auto parsed = read_results_csv((dir / "a" / "results.csv").string());
    REQUIRE(parsed.size() == rows1.size());
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        REQUIRE(parsed[i].dataset == rows1[i].dataset);
        REQUIRE(parsed[i].seed == rows1[i].seed);
        REQUIRE(parsed[i].status == rows1[i].status);
        if (rows1[i].status == "ok") {
            REQUIRE(parsed[i].detector_metrics.auc_pr_adjusted ==
                    rows1[i].detector_metrics.auc_pr_adjusted);
            REQUIRE(parsed[i].tau_c.defined == rows1[i].tau_c.defined);
        }
    }
    fs::remove_all(dir);
}

TEST_CASE("report aggregates match an independent recomputation") {
    BenchConfig config = fast_config();
    config.repeats = 2;
    const auto datasets = fixture_datasets();
    const auto rows = run_benchmark(config, datasets);
    const BenchReport rep = summarize(rows);

    // recompute one detector table entry from the raw rows
    for (const SummaryRow& sr : rep.detector_table) {
        std::vector<double> vals;
        for (const ExperimentResult& r : rows) {
            if (r.status != "ok") continue;
            const std::string pair = (r.problem == "Real") ? "real" : r.pair;
            if (pair == sr.group_a && r.detector == sr.group_b) {
                vals.push_back(r.detector_metrics.auc_pr_adjusted);
            }
        }
        REQUIRE(vals.size() == sr.cells);
        REQUIRE(sr.mean == Catch::Approx(mean(vals)).margin(1e-12));
        REQUIRE(sr.median == Catch::Approx(median(vals)).margin(1e-12));
    }

    // single-row table reproduces the cell verbatim
    const std::vector<ExperimentResult> one{rows.front()};
    const BenchReport single = summarize(one);
    REQUIRE(single.detector_table.size() == 1);
    REQUIRE(single.detector_table[0].mean == rows.front().detector_metrics.auc_pr_adjusted);
    REQUIRE(single.detector_table[0].median == rows.front().detector_metrics.auc_pr_adjusted);
}

TEST_CASE("report on all-failed results warns instead of crashing") {
    ExperimentResult bad;
    bad.dataset = "x";
    bad.problem = "Synth";
    bad.pair = "vine_vine";
    bad.detector = "lof_5";
    bad.status = "failed: nope";
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "synthbench_report_test";
    fs::create_directories(dir);
    emit_report({bad}, dir.string());
    std::ifstream txt(dir / "report.txt");
    std::stringstream ss;
    ss << txt.rdbuf();
    REQUIRE(ss.str().find("WARNING") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("config json round-trip") {
    BenchConfig c = fast_config();
    c.datasets.push_back(DatasetSpec{"d1", "/tmp/d1.csv", "class", "bad"});
    c.xi = 0.04;
    c.gen.alpha = 7.0;
    const nlohmann::json j = bench_config_to_json(c);
    const BenchConfig back = bench_config_from_json(j);
    REQUIRE(back.datasets.size() == 1);
    REQUIRE(back.datasets[0].id == "d1");
    REQUIRE(back.pairs == c.pairs);
    REQUIRE(back.detectors == c.detectors);
    REQUIRE(back.xi == c.xi);
    REQUIRE(back.gen.alpha == 7.0);
    REQUIRE(back.master_seed == c.master_seed);
}

TEST_CASE("model serialization carries the fitted parameters") {
    const LabeledDataset ds = clustered_fixture(300, 2, 9);
    BenchConfig c = fast_config();
    const SynthProblem sp = build_problem(ds, parse_pair("gauss_gauss"), 0.05, 3, c.gen);
    const nlohmann::json reg = to_json(sp.models[0]);
    REQUIRE(reg.at("family") == "gauss");
    REQUIRE(reg.at("components").size() == sp.models[0].as_gmm()->g());

    const UniformModel box{{0.0}, {1.0}};
    const nlohmann::json bj = to_json(GenerativeModel(box));
    REQUIRE(bj.at("family") == "unif");
    REQUIRE(bj.at("lower")[0] == 0.0);
}
