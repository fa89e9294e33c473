#include <CLI11.hpp>
#include <cstdint>
#include <optional>
#include <string>

#include "wdrc/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Distributionally robust sampled-data growth control"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "run configuration JSON")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option_function<std::uint64_t>(
            "--seed", [&](std::uint64_t v) { seed = v; }, "override the config seed");
        sub->add_option_function<int>(
            "--jobs", [&](int v) { jobs = v; }, "worker threads for independent solves");
    };

    add_common(app.add_subcommand("calibrate", "calibrate ambiguity radii, write radii.json"));
    add_common(app.add_subcommand("solve", "solve the robust program per horizon"));
    add_common(app.add_subcommand("backtest", "run the rolling out-of-sample engine"));
    add_common(app.add_subcommand("tc-sweep", "transaction-cost sensitivity of the adaptive scheme"));
    add_common(app.add_subcommand("simulate", "long-run and viability verification harness"));
    auto* report = app.add_subcommand("report", "render SVG plots and a summary table");
    report->add_option("--dir", out_dir, "directory with backtest outputs")->required();

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();
    return wdrc::cli::dispatch(command, config_path, out_dir, seed, jobs);
}

