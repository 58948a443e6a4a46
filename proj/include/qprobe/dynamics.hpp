// dynamics.hpp - Exact evolution, reduction to the spin, Bloch vectors and D(t)

#pragma once

#include "qprobe/hilbert.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <utility>
#include <vector>

namespace qprobe {

using Vec3 = Eigen::Vector3d;

// Sampling rate of the reference experiment, in samples per τ.
inline constexpr double kReferenceRatePerTau = 15.0;

// Strictly increasing, non-negative sample times over a nominal window
// [0, t_max]. Resampled grids may be non-uniform and need not start at 0.
class TimeGrid {
public:
    TimeGrid(double t_max, std::vector<double> times);

    // t_i = i·t_max/(M−1), i = 0..M−1.
    static TimeGrid uniform(double t_max, std::size_t sample_count);
    // Uniform grid with M = round(rate·t_max) + 1 points.
    static TimeGrid with_rate(double t_max, double rate);

    double t_max() const noexcept { return t_max_; }
    const std::vector<double>& times() const noexcept { return times_; }
    std::size_t size() const noexcept { return times_.size(); }
    // Mean sampling rate (M−1)/t_max.
    double rate() const noexcept { return static_cast<double>(times_.size() - 1) / t_max_; }

    // Grid restricted to the given (sorted, unique) indices; t_max is kept.
    TimeGrid subset(const std::vector<std::size_t>& indices) const;

private:
    double t_max_;
    std::vector<double> times_;
};

struct PropagatorBundle {
    Eigen::VectorXd eigenvalues;  // ascending, rad/s
    ComplexMatrix eigenvectors;   // columns, unitary
    ModelParams params;

    // U(t) = V e^{−iΛt} V†
    ComplexMatrix unitary(double t) const;
};

// Eigendecomposition of a Hermitian Hamiltonian.
PropagatorBundle diagonalize(const ComplexMatrix& h, const ModelParams& params);

// ρ(t) = U(t) ρ(0) U†(t)
DensityMatrix evolve(const PropagatorBundle& bundle, const DensityMatrix& rho0, double t);

// (ρ_S)_{ss'} = Σ_n ρ_{(s,n),(s',n)}
DensityMatrix partial_trace_env(const DensityMatrix& rho_total);

Vec3 bloch_vector(const DensityMatrix& rho_spin);

// Half the Euclidean distance between two Bloch vectors.
double trace_distance(const Vec3& v1, const Vec3& v2);

// Uhlmann fidelity Tr √(√ρ1 ρ2 √ρ1), clamped to [0, 1].
double fidelity(const DensityMatrix& rho1, const DensityMatrix& rho2);

struct BlochTrajectory {
    TimeGrid grid;
    std::vector<Vec3> vectors1;  // initial spin |↑⟩
    std::vector<Vec3> vectors2;  // initial spin |↓⟩
    // Per-component standard deviations; empty for noiseless trajectories.
    std::vector<Vec3> sigmas1;
    std::vector<Vec3> sigmas2;

    bool has_sigmas() const noexcept { return !sigmas1.empty(); }
};

struct DistanceSeries {
    TimeGrid grid;
    std::vector<double> D;
    std::vector<double> deltaD;
};

// Spin expectation values ⟨σ_l⟩(t) for one initial state, evaluated directly in
// the energy eigenbasis: ⟨O⟩(t) = Σ_jk ρ̃_jk Õ_kj e^{−i(λ_j−λ_k)t}. Each call is
// O(dim²) and needs no matrix products.
class BlochEvolver {
public:
    BlochEvolver(const PropagatorBundle& bundle, const DensityMatrix& rho0);
    Vec3 at(double t) const;

private:
    Eigen::VectorXd eigenvalues_;
    ComplexMatrix weights_[3];
};

// Prepared model: Hamiltonian eigensystem plus evolvers for both initial spins.
class SpinProbe {
public:
    explicit SpinProbe(const ModelParams& params);

    const ModelParams& params() const noexcept { return bundle_.params; }
    const PropagatorBundle& bundle() const noexcept { return bundle_; }
    BlochTrajectory trajectory(const TimeGrid& grid) const;

private:
    PropagatorBundle bundle_;
    BlochEvolver up_;
    BlochEvolver down_;
};

// D_i from the trajectory's Bloch vectors; deltaD is zero.
DistanceSeries distances(const BlochTrajectory& trajectory);

std::pair<BlochTrajectory, DistanceSeries> simulate_distance_series(const ModelParams& params,
                                                                    const TimeGrid& grid);

}  // namespace qprobe
