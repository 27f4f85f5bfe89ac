// Command-line front end: `bench run`, `bench realness`, `bench report`.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "synthbench/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Outlier-detection benchmark on reconstructed synthetic data"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "bench_out", results_path;
    int workers = 0;
    std::uint64_t seed = 0;

    CLI::App* run = app.add_subcommand("run", "Run the detection benchmark matrix");
    run->add_option("--config", config_path, "JSON config file")->required();
    run->add_option("--out", out_dir, "Output directory");
    CLI::Option* workers_opt = run->add_option("--workers", workers, "Parallel worker count");
    CLI::Option* run_seed_opt = run->add_option("--seed", seed, "Master seed override");

    CLI::App* realness = app.add_subcommand("realness", "Run the classifier realness protocol");
    realness->add_option("--config", config_path, "JSON config file")->required();
    realness->add_option("--out", out_dir, "Output directory");
    CLI::Option* realness_seed_opt =
        realness->add_option("--seed", seed, "Master seed override");

    CLI::App* report = app.add_subcommand("report", "Summarize a results CSV");
    report->add_option("--results", results_path, "results.csv from a run")->required();
    CLI::Option* report_out_opt =
        report->add_option("--out", out_dir, "Output directory (default: alongside the results)");

    CLI11_PARSE(app, argc, argv);

    try {
        using namespace synthbench;
        if (run->parsed() || realness->parsed()) {
            BenchConfig config = load_bench_config(config_path);
            if (run_seed_opt->count() || realness_seed_opt->count()) config.master_seed = seed;
            if (workers_opt->count()) config.workers = workers;
            const auto datasets = load_datasets(config);
            if (run->parsed()) {
                const auto rows = run_benchmark_to_dir(config, out_dir, datasets);
                emit_report(rows, out_dir);
                std::size_t failed = 0;
                for (const auto& r : rows) failed += (r.status != "ok");
                std::cout << "wrote " << rows.size() << " result rows to " << out_dir
                          << "/results.csv";
                if (failed) std::cout << " (" << failed << " failed cells)";
                std::cout << "\n";
            } else {
                const auto rows = run_realness_to_dir(config, out_dir, datasets);
                std::size_t failed = 0;
                for (const auto& r : rows) failed += !r.result.ok;
                std::cout << "wrote " << rows.size() << " realness rows to " << out_dir
                          << "/realness.csv";
                if (failed) std::cout << " (" << failed << " failed cells)";
                std::cout << "\n";
            }
        } else if (report->parsed()) {
            const auto rows = read_results_csv(results_path);
            if (!report_out_opt->count()) {
                out_dir = std::filesystem::path(results_path).parent_path().string();
                if (out_dir.empty()) out_dir = ".";
            }
            emit_report(rows, out_dir);
            std::cout << "wrote report tables to " << out_dir << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
