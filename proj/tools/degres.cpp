// degres <command> --config <path> [--out <dir>] [--jobs N] [--svg]

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "degres/io/run.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Resonance-zone dynamics: averaging, equilibria, bifurcation diagrams, portraits and cylinder maps"};
    app.set_version_flag("--version", std::string(degres::io::kVersion));

    std::string command;
    std::string config;
    degres::io::RunOptions opts;
    std::string out_dir = ".";

    std::vector<std::string> names;
    for (auto c : degres::io::kAllCommands) names.emplace_back(degres::io::to_string(c));
    app.add_option("command", command, "resonances | average | equilibria | bifdiag | portrait | reconnect | map-orbits | verify")
        ->required()
        ->check(CLI::IsMember(names));
    app.add_option("--config", config, "key = value configuration file")->required();
    app.add_option("--out", out_dir, "output directory (created if missing)");
    app.add_option("--jobs", opts.jobs, "worker threads for sweeps")->check(CLI::PositiveNumber);
    app.add_flag("--svg", opts.svg, "also render SVG figures");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : degres::io::kExitConfig;
    }
    opts.out_dir = out_dir;
    return degres::io::run_command(command, config, opts, std::cout, std::cerr);
}
