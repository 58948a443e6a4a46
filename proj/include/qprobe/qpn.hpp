// qpn.hpp - Quantum projection noise injection, postselection and bias surfaces

#pragma once

#include "qprobe/blp.hpp"
#include "qprobe/random.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace qprobe {

enum class NoiseModel { none, gaussian, binomial };

struct QPNConfig {
    double r{500.0};  // repetitions per expectation value; may be infinite
    NoiseModel noise{NoiseModel::gaussian};
    std::size_t k_series{50};   // replicas averaged for D(t)
    std::size_t k_measure{50};  // replicas averaged for N
    std::size_t resample_iterations{100};
    std::uint64_t seed{0};

    void validate() const;
    // True when injected values equal the input (no noise model or r = ∞).
    bool noiseless() const noexcept;
};

// One noisy realization of both Bloch trajectories. Gaussian: ⟨σ⟩ + N(0, δ⟨σ⟩)
// without clamping. Binomial: 2·Binomial(r, p)/r − 1. The recorded sigmas are
// qpn_sigma of the true values.
BlochTrajectory inject_qpn(const BlochTrajectory& truth, const QPNConfig& config, Rng& rng);

struct MeasureSummary {
    NMResult result;  // value: mean N; uncertainty: mean propagated δN
    double spread{0.0};  // sample s.d. of N over replicas
    std::vector<double> replicas;
};

// k_measure noisy replicas of N(t_max) for every requested window. All
// windows share the same replicas, so the staircase is consistent. `stream`
// separates independent uses of the same seed.
std::vector<MeasureSummary> noisy_measure(const BlochTrajectory& truth, const QPNConfig& config,
                                          std::span<const double> t_max_values, std::uint64_t stream = 0);

MeasureSummary noisy_measure(const ModelParams& params, const TimeGrid& grid, const QPNConfig& config,
                             double t_max);

// D averaged over k_series noisy replicas. deltaD is δD propagated at the
// true Bloch vectors with the QPN sigmas for r.
DistanceSeries mean_noisy_distance(const BlochTrajectory& truth, const QPNConfig& config,
                                   std::uint64_t stream = 0);

// Binary projective outcomes, r0 per (time, initial state, component).
class OutcomeRecords {
public:
    OutcomeRecords(TimeGrid grid, std::size_t r0);

    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t r0() const noexcept { return r0_; }
    // Outcomes for time index i, state m ∈ {0, 1}, component l ∈ {0, 1, 2}; 1 = ↑.
    std::span<std::uint8_t> outcomes(std::size_t i, int m, int l);
    std::span<const std::uint8_t> outcomes(std::size_t i, int m, int l) const;

private:
    TimeGrid grid_;
    std::size_t r0_;
    std::vector<std::uint8_t> bits_;
};

// Draw r0 outcomes per expectation value with P(↑) = (⟨σ⟩+1)/2.
OutcomeRecords record_outcomes(const BlochTrajectory& truth, std::size_t r0, Rng& rng);

// Subensemble of r outcomes per point, drawn without replacement. Means are
// 2·(ups/r) − 1 with sigmas qpn_sigma(mean, r).
BlochTrajectory resample_r(const OutcomeRecords& records, std::size_t r, Rng& rng);

// Uniformly random size-M subset of the series' points, kept in time order.
// The nominal t_max is kept, so the reported rate is (M−1)/t_max.
DistanceSeries resample_gamma(const DistanceSeries& series, std::size_t M, Rng& rng);

struct ScanPoint {
    double x{0.0};  // r, or the mean rate (M−1)/t_max
    double N_mean{0.0};
    double N_std{0.0};
};

// N(γ₀, r) from one simulated r0-outcome record per point, averaged over
// resample_iterations subensembles. config.r is taken as r0.
std::vector<ScanPoint> r_postselection_scan(const BlochTrajectory& truth, const QPNConfig& config,
                                            std::span<const std::size_t> r_values, double t_max);

// N(γ, r) by postselecting M of the truth grid's points, averaged over
// resample_iterations, each with a fresh noise realization.
std::vector<ScanPoint> gamma_postselection_scan(const BlochTrajectory& truth, const QPNConfig& config,
                                                std::span<const std::size_t> M_values, double t_max);

struct BiasSurface {
    std::vector<double> gamma_grid;  // realized rates (M−1)/t_max
    std::vector<double> r_grid;
    Eigen::MatrixXd N_mean;  // rows: gamma, cols: r
    Eigen::MatrixXd N_std;
    double N_true{0.0};
    Eigen::MatrixXd B;  // N_mean − N_true; B + N_true == N_mean exactly
};

// Mean N over k_measure noisy replicas on a uniform grid at each rate γ, for
// each r (config.r is ignored).
BiasSurface bias_surface(const SpinProbe& probe, double t_max, std::span<const double> gamma_grid,
                         std::span<const double> r_grid, const QPNConfig& config, double N_true,
                         std::size_t threads = 1);

BiasSurface bias_surface(const ModelParams& params, double t_max, std::span<const double> gamma_grid,
                         std::span<const double> r_grid, const QPNConfig& config,
                         const TrueValueOptions& truth = {}, std::size_t threads = 1);

// Adds N(0, sigma_D) to every D value. Used for pure-noise controls.
DistanceSeries add_distance_noise(const DistanceSeries& series, double sigma_D, Rng& rng);

// Detuned coupling rate √(Ω² + δω²).
double effective_coupling(double Omega, double delta_omega);
// Oscillation amplitude factor Ω²/Ω′² ∈ (0, 1].
double resonance_amplitude(double Omega, double delta_omega);

}  // namespace qprobe
