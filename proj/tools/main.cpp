#include <iostream>

#include <CLI11.hpp>

#include "modediag/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Multimode diagnosis for switched affine systems"};
    app.require_subcommand(1);
    modediag::cli::Options opt;
    std::uint64_t seed = 0;
    int runs = 0;
    double tol = 0.0;
    std::string out;

    const std::pair<const char*, const char*> commands[] = {
        {"check", "Degree and rank feasibility report for every filter pair"},
        {"synthesize", "Synthesize the filter bank and write bank.json"},
        {"thresholds", "Compute thresholds, matched times and waiting times"},
        {"simulate", "Simulate the scenario and write trace.csv"},
        {"montecarlo", "Monte-Carlo isolation statistics"},
        {"invalidate", "Sliding-window model invalidation sweep"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", opt.config, "Config file (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "Output directory");
        sub->add_option("--seed", seed, "Override the random seed");
        sub->add_option("--runs", runs, "Override the Monte-Carlo run count");
        sub->add_option("--jobs", opt.jobs, "Worker threads (0: all cores)");
        sub->add_option("--tol", tol, "Solver tolerance");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : modediag::cli::kValidation;
    }
    const CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--out")) opt.out = out;
    if (sub->count("--seed")) opt.seed = seed;
    if (sub->count("--runs")) opt.runs = runs;
    if (sub->count("--tol")) opt.tol = tol;
    return modediag::cli::run(sub->get_name(), opt, std::cout, std::cerr);
}
