// qprobe - spin-boson memory-effect simulations from the command line
//
//   qprobe simulate --config run.json [--seed N] [--out DIR] [--threads N] [--noise MODEL]
//
// Each subcommand writes <out>/<subcommand>.csv.

#include "qprobe/errors.hpp"
#include "qprobe/harness/commands.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace h = qprobe::harness;

int main(int argc, char** argv) {
    CLI::App app{"Spin-boson trace-distance dynamics, non-Markovianity and QPN bias"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> noise;
    std::size_t threads = 1;

    for (const char* name : {"simulate", "measure", "bias", "sweep"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON run configuration (defaults if omitted)");
        sub->add_option("--seed", seed, "root random seed");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--noise", noise, "noise model")->check(CLI::IsMember({"gaussian", "binomial", "none"}));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : static_cast<int>(h::ExitCode::usage);
    }
    const std::string command = app.get_subcommands().front()->get_name();

    h::RunConfig config;
    try {
        config = config_path.empty() ? h::default_config() : h::load_config(config_path);
        if (seed) {
            config.seed = *seed;
            config.qpn.seed = *seed;
        }
        if (out_dir) config.output_dir = *out_dir;
        if (noise) config.qpn.noise = h::parse_noise(*noise);
        config.validate();
    } catch (const qprobe::ParameterError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return static_cast<int>(h::ExitCode::config);
    }

    const h::ExitCode code = h::run_command(command, config, h::RunOptions{threads}, std::cerr);
    if (code == h::ExitCode::ok) std::cout << h::output_path(config, command).string() << '\n';
    return static_cast<int>(code);
}
