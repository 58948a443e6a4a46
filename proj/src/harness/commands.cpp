#include "qprobe/harness/commands.hpp"

#include "qprobe/errors.hpp"
#include "qprobe/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace qprobe::harness {

namespace {

void add_provenance(ResultTable& table, const RunConfig& config, const std::string& command) {
    table.add_provenance(std::string("qprobe ") + kCodeVersion);
    table.add_provenance("command: " + command);
    table.add_provenance("config_hash: " + config_hash(config));
    table.add_provenance("seed: " + std::to_string(config.seed));
    table.add_provenance("config: " + canonical_config(config));
}

std::vector<double> scaled(const std::vector<double>& xs, double factor) {
    std::vector<double> out(xs.size());
    std::transform(xs.begin(), xs.end(), out.begin(), [factor](double x) { return x * factor; });
    return out;
}

struct SweepRows {
    std::vector<double> N_mean, N_std, deltaN, N_true;
};

const char* axis_column(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::omega_z: return "omega_z_MHz";
        case SweepAxis::nbar: return "nbar";
        case SweepAxis::gamma: return "gamma_tau";
        case SweepAxis::r: return "r";
        case SweepAxis::t_max: return "t_max_value_tau";
    }
    return "value";
}

}  // namespace

ResultTable cmd_simulate(const RunConfig& config, const RunOptions&) {
    config.validate();
    const SpinProbe probe(config.model_params());
    const BlochTrajectory truth = probe.trajectory(config.time_grid());
    const DistanceSeries exact = distances(truth);
    const DistanceSeries noisy = mean_noisy_distance(truth, config.qpn);

    ResultTable table;
    add_provenance(table, config, "simulate");
    table.add_column("t_tau", scaled(truth.grid.times(), 1.0 / config.tau()));
    table.add_column("D_true", exact.D);
    table.add_column("D_noisy_mean", noisy.D);
    table.add_column("deltaD", noisy.deltaD);
    return table;
}

ResultTable cmd_measure(const RunConfig& config, const RunOptions&) {
    config.validate();
    const SpinProbe probe(config.model_params());
    const TimeGrid grid = config.time_grid();
    const BlochTrajectory truth = probe.trajectory(grid);
    const std::vector<double> windows(grid.times().begin() + 1, grid.times().end());

    const auto noisy = noisy_measure(truth, config.qpn, windows);
    const TrueValueRun true_run = run_true_value(probe, grid.t_max(), config.truth_options());

    ResultTable table;
    add_provenance(table, config, "measure");
    std::vector<double> n_mean, n_std, delta_n, n_true, bias;
    for (std::size_t w = 0; w < windows.size(); ++w) {
        const double nt = nonmarkovianity(true_run.reference, windows[w]).value;
        n_mean.push_back(noisy[w].result.value);
        n_std.push_back(noisy[w].spread);
        delta_n.push_back(noisy[w].result.uncertainty);
        n_true.push_back(nt);
        bias.push_back(noisy[w].result.value - nt);
    }
    table.add_column("t_max_tau", scaled(windows, 1.0 / config.tau()));
    table.add_column("N_noisy_mean", std::move(n_mean));
    table.add_column("N_noisy_std", std::move(n_std));
    table.add_column("deltaN", std::move(delta_n));
    table.add_column("N_true", std::move(n_true));
    table.add_column("B", std::move(bias));
    return table;
}

ResultTable cmd_bias(const RunConfig& config, const RunOptions& options) {
    config.validate();
    if (!config.bias) throw ParameterError("config: the bias command needs a 'bias' section");
    const BiasSpec& spec = *config.bias;
    const double tau = config.tau();
    const double t_max = config.grid.t_max_tau * tau;
    const SpinProbe probe(config.model_params());
    const double n_true = run_true_value(probe, t_max, config.truth_options()).estimate.N_true;

    ResultTable table;
    add_provenance(table, config, "bias");
    std::vector<double> gamma_col, r_col, mean_col, std_col, scan_col;

    if (spec.method == BiasMethod::grid) {
        const BiasSurface surface =
            bias_surface(probe, t_max, scaled(spec.gamma_tau, 1.0 / tau), spec.r, config.qpn, n_true, options.threads);
        for (std::size_t g = 0; g < surface.gamma_grid.size(); ++g) {
            for (std::size_t c = 0; c < surface.r_grid.size(); ++c) {
                const auto gi = static_cast<Eigen::Index>(g);
                const auto ci = static_cast<Eigen::Index>(c);
                gamma_col.push_back(surface.gamma_grid[g] * tau);
                r_col.push_back(surface.r_grid[c]);
                mean_col.push_back(surface.N_mean(gi, ci));
                std_col.push_back(surface.N_std(gi, ci));
            }
        }
    } else {
        const BlochTrajectory truth = probe.trajectory(config.time_grid());
        const std::size_t m0 = truth.grid.size();
        std::vector<std::size_t> r_values;
        for (double r : spec.r) {
            if (!std::isfinite(r) || r > config.qpn.r)
                throw ParameterError("config: postselected r must be finite and at most qpn.r");
            r_values.push_back(static_cast<std::size_t>(r));
        }
        std::vector<std::size_t> m_values;
        for (double g : spec.gamma_tau) {
            const double m = std::round(g * config.grid.t_max_tau) + 1.0;
            if (m < 2.0 || m > static_cast<double>(m0))
                throw ParameterError("config: postselected gamma must give 2 <= M <= M0");
            m_values.push_back(static_cast<std::size_t>(m));
        }
        for (const auto& p : r_postselection_scan(truth, config.qpn, r_values, t_max)) {
            gamma_col.push_back(truth.grid.rate() * tau);
            r_col.push_back(p.x);
            mean_col.push_back(p.N_mean);
            std_col.push_back(p.N_std);
            scan_col.push_back(0.0);
        }
        for (const auto& p : gamma_postselection_scan(truth, config.qpn, m_values, t_max)) {
            gamma_col.push_back(p.x * tau);
            r_col.push_back(config.qpn.r);
            mean_col.push_back(p.N_mean);
            std_col.push_back(p.N_std);
            scan_col.push_back(1.0);
        }
    }

    std::vector<double> b_col, rel_col;
    for (double m : mean_col) {
        b_col.push_back(m - n_true);
        rel_col.push_back(n_true > 0.0 ? (m - n_true) / n_true : 0.0);
    }
    if (!scan_col.empty()) table.add_column("scan", std::move(scan_col));
    table.add_column("gamma_tau", std::move(gamma_col));
    table.add_column("r", std::move(r_col));
    table.add_column("N_mean", std::move(mean_col));
    table.add_column("N_std", std::move(std_col));
    table.add_column("N_true", std::vector<double>(b_col.size(), n_true));
    table.add_column("B", std::move(b_col));
    table.add_column("B_rel", std::move(rel_col));
    return table;
}

ResultTable cmd_sweep(const RunConfig& config, const RunOptions& options) {
    config.validate();
    if (!config.sweep) throw ParameterError("config: the sweep command needs a 'sweep' section");
    const SweepSpec& spec = *config.sweep;
    const double tau = config.tau();
    const std::size_t nv = spec.values.size();
    std::vector<SweepRows> rows(nv);

    parallel_for(nv, options.threads, [&](std::size_t k) {
        RunConfig cell = config;
        std::vector<double> windows_tau = spec.t_max_tau;
        double rate_tau = static_cast<double>(config.grid.samples - 1) / config.grid.t_max_tau;
        switch (spec.axis) {
            case SweepAxis::omega_z: cell.model.omega_z_MHz = spec.values[k]; break;
            case SweepAxis::nbar: cell.model.nbar = spec.values[k]; break;
            case SweepAxis::gamma: rate_tau = spec.values[k]; break;
            case SweepAxis::r: cell.qpn.r = spec.values[k]; break;
            case SweepAxis::t_max: windows_tau = {spec.values[k]}; break;
        }
        cell.sweep.reset();
        cell.validate();
        const double longest = *std::max_element(windows_tau.begin(), windows_tau.end());
        const std::vector<double> windows = scaled(windows_tau, tau);

        const SpinProbe probe(cell.model_params());
        const BlochTrajectory truth = probe.trajectory(TimeGrid::with_rate(longest * tau, rate_tau / tau));
        const auto noisy = noisy_measure(truth, cell.qpn, windows, k);
        const auto truths = estimate_true_N(probe, windows, cell.truth_options());
        for (std::size_t w = 0; w < windows.size(); ++w) {
            rows[k].N_mean.push_back(noisy[w].result.value);
            rows[k].N_std.push_back(noisy[w].spread);
            rows[k].deltaN.push_back(noisy[w].result.uncertainty);
            rows[k].N_true.push_back(truths[w].N_true);
        }
    });

    std::vector<double> value_col, tmax_col, mean_col, std_col, delta_col, true_col, bias_col;
    for (std::size_t k = 0; k < nv; ++k) {
        const std::vector<double> windows_tau =
            spec.axis == SweepAxis::t_max ? std::vector<double>{spec.values[k]} : spec.t_max_tau;
        for (std::size_t w = 0; w < windows_tau.size(); ++w) {
            value_col.push_back(spec.values[k]);
            tmax_col.push_back(windows_tau[w]);
            mean_col.push_back(rows[k].N_mean[w]);
            std_col.push_back(rows[k].N_std[w]);
            delta_col.push_back(rows[k].deltaN[w]);
            true_col.push_back(rows[k].N_true[w]);
            bias_col.push_back(rows[k].N_mean[w] - rows[k].N_true[w]);
        }
    }
    ResultTable table;
    add_provenance(table, config, "sweep");
    table.add_column(axis_column(spec.axis), std::move(value_col));
    table.add_column("t_max_tau", std::move(tmax_col));
    table.add_column("N_noisy_mean", std::move(mean_col));
    table.add_column("N_noisy_std", std::move(std_col));
    table.add_column("deltaN", std::move(delta_col));
    table.add_column("N_true", std::move(true_col));
    table.add_column("B", std::move(bias_col));
    return table;
}

bool is_command(const std::string& name) {
    return name == "simulate" || name == "measure" || name == "bias" || name == "sweep";
}

ResultTable run_table(const std::string& command, const RunConfig& config, const RunOptions& options) {
    if (command == "simulate") return cmd_simulate(config, options);
    if (command == "measure") return cmd_measure(config, options);
    if (command == "bias") return cmd_bias(config, options);
    if (command == "sweep") return cmd_sweep(config, options);
    throw ParameterError("unknown command '" + command + "'");
}

std::filesystem::path output_path(const RunConfig& config, const std::string& command) {
    return std::filesystem::path(config.output_dir) / (command + ".csv");
}

ExitCode run_command(const std::string& command, const RunConfig& config, const RunOptions& options,
                     std::ostream& err) {
    try {
        const ResultTable table = run_table(command, config, options);
        table.write_csv(output_path(config, command));
        return ExitCode::ok;
    } catch (const ConvergenceError& e) {
        err << "convergence error: " << e.what() << '\n';
        return ExitCode::convergence;
    } catch (const ParameterError& e) {
        err << "config error: " << e.what() << '\n';
        return ExitCode::config;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << '\n';
        return ExitCode::numeric;
    } catch (const std::exception& e) {
        err << "i/o error: " << e.what() << '\n';
        return ExitCode::io;
    }
}

}  // namespace qprobe::harness
