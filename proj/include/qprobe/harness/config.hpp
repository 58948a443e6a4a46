// config.hpp - Run configuration in experiment-facing units
//
// The file is JSON. Frequencies are given as ω/2π (MHz for the spin and mode,
// kHz for the coupling), times and rates in units of τ = 2π/Ω. Conversion to
// the library's rad/s and seconds happens only here.

#pragma once

#include "qprobe/blp.hpp"
#include "qprobe/qpn.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace qprobe::harness {

struct ModelSpec {
    double omega_z_MHz{1.920};
    double omega_E_MHz{1.920};
    double Omega_kHz{100.0};
    // Frequency whose period defines τ; 0 means Omega_kHz. Needed when Ω = 0.
    double tau_reference_kHz{0.0};
    double eta{0.32};
    double nbar{1.0};
    int n_cut{20};
    int n_pad{10};
};

struct GridSpec {
    double t_max_tau{9.0};
    std::size_t samples{136};  // γ₀ = (samples − 1)/t_max
};

struct TruthSpec {
    double multiplier{100.0};
    double check_multiplier{200.0};
    double tolerance{1e-3};
};

enum class BiasMethod { grid, postselect };

struct BiasSpec {
    std::vector<double> gamma_tau;  // rates in 1/τ
    std::vector<double> r;          // may contain infinity ("inf" in the file)
    BiasMethod method{BiasMethod::grid};
};

enum class SweepAxis { omega_z, nbar, gamma, r, t_max };

struct SweepSpec {
    SweepAxis axis{SweepAxis::omega_z};
    std::vector<double> values;  // MHz for omega_z, 1/τ for gamma, τ for t_max
    std::vector<double> t_max_tau{2.0, 5.0, 9.0};
};

struct RunConfig {
    ModelSpec model;
    GridSpec grid;
    QPNConfig qpn;  // qpn.seed mirrors `seed`
    TruthSpec truth;
    std::optional<BiasSpec> bias;
    std::optional<SweepSpec> sweep;
    std::string output_dir{"out"};
    std::uint64_t seed{20170101};

    void validate() const;

    ModelParams model_params() const;
    double tau() const;             // seconds
    double reference_rate() const;  // γ₀ in 1/s
    TimeGrid time_grid() const;     // [0, t_max] at γ₀
    TrueValueOptions truth_options() const;
};

// Reference experiment: ω_E/2π = 1.920 MHz, Ω/2π = 100 kHz, η = 0.32, n_cut = 20,
// r₀ = 500, γ₀ = 15/τ, t_max = 9τ.
RunConfig default_config();

// Throws ParameterError on unknown keys, wrong types or invalid values.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& config);
RunConfig load_config(const std::filesystem::path& path);

// Compact canonical JSON (sorted keys, output_dir left out) and its 64-bit
// FNV-1a hash as hex.
std::string canonical_config(const RunConfig& config);
std::string config_hash(const RunConfig& config);

std::string to_string(SweepAxis axis);
std::string to_string(NoiseModel noise);
NoiseModel parse_noise(const std::string& name);

}  // namespace qprobe::harness
