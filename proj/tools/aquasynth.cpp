// Batch front end: renders (image x water type x mode) grids or survey pairs
// from a JSON configuration.

#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "aquasynth/batch.hpp"

int main(int argc, char** argv) {
    CLI::App app{"aquasynth - synthetic turbid-water image generation"};
    app.set_version_flag("--version", std::string(aquasynth::kVersion));

    aquasynth::RunOptions opt;
    std::string config;
    bool pairs = false;
    bool quiet = false;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    app.add_option("--config", config, "JSON configuration file")->required()->check(CLI::ExistingFile);
    app.add_option("--jobs", jobs, "Maximum number of parallel jobs")->check(CLI::PositiveNumber);
    app.add_flag("--dry-run", opt.dry_run, "Expand and validate the job list without writing anything");
    app.add_flag("--emit-terms", opt.emit_terms, "Also write direct/forward/backscatter term grids");
    app.add_flag("--pairs", pairs, "Emit reference/proposed comparison pairs");
    app.add_flag("-q,--quiet", quiet, "Suppress per-job progress lines");
    CLI11_PARSE(app, argc, argv);

    opt.config_path = config;
    opt.jobs = jobs;
    if (!quiet) opt.progress = &std::cerr;

    try {
        const auto result = pairs ? aquasynth::run_pairs(opt) : aquasynth::run_batch(opt);
        if (opt.dry_run) {
            for (const auto& p : result.outputs) std::cout << p.generic_string() << '\n';
            std::cout << result.outputs.size() << " output(s) planned, nothing written\n";
        } else {
            const auto& s = result.manifest["summary"];
            std::cout << s["ok"].get<std::size_t>() << "/" << s["total"].get<std::size_t>() << " succeeded\n";
        }
        return result.exit_code;
    } catch (const aquasynth::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
