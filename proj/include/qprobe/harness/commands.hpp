// commands.hpp - Experiment orchestration behind the CLI subcommands

#pragma once

#include "qprobe/harness/config.hpp"
#include "qprobe/harness/table.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace qprobe::harness {

enum class ExitCode : int {
    ok = 0,
    usage = 1,
    config = 2,
    numeric = 3,
    convergence = 4,
    io = 5,
};

struct RunOptions {
    std::size_t threads{1};  // output does not depend on this
};

// t_tau, D_true, D_noisy_mean, deltaD on the γ₀ grid.
ResultTable cmd_simulate(const RunConfig& config, const RunOptions& options = {});
// N(t_max) staircase: t_max_tau, N_noisy_mean, N_noisy_std, deltaN, N_true, B.
ResultTable cmd_measure(const RunConfig& config, const RunOptions& options = {});
// Long-format bias surface: gamma_tau, r, N_mean, N_std, N_true, B, B_rel
// (plus `scan` for the postselection method). Requires config.bias.
ResultTable cmd_bias(const RunConfig& config, const RunOptions& options = {});
// One row per (sweep value, t_max): <axis>, t_max_tau, N_noisy_mean,
// N_noisy_std, deltaN, N_true, B. Requires config.sweep.
ResultTable cmd_sweep(const RunConfig& config, const RunOptions& options = {});

bool is_command(const std::string& name);
ResultTable run_table(const std::string& command, const RunConfig& config, const RunOptions& options = {});

// <output_dir>/<command>.csv
std::filesystem::path output_path(const RunConfig& config, const std::string& command);

// Runs the command, writes its CSV, and maps failures to exit codes with a
// one-line diagnostic on `err`.
ExitCode run_command(const std::string& command, const RunConfig& config, const RunOptions& options,
                     std::ostream& err);

}  // namespace qprobe::harness
