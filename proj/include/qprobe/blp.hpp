// blp.hpp - Trace-distance non-Markovianity measure and its QPN uncertainties
//
// N is the sum of all positive increments D_i − D_{i−1} of a sampled D(t)
// over consecutive grid points with t_i ≤ t_max.

#pragma once

#include "qprobe/dynamics.hpp"

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace qprobe {

inline constexpr double kInfiniteRepetitions = std::numeric_limits<double>::infinity();

// δD is undefined at D = 0; at or below this floor delta_D throws.
inline constexpr double kDistanceFloor = 1e-12;

struct NMResult {
    double value{0.0};        // N ≥ 0
    double uncertainty{0.0};  // δN ≥ 0
    double t_max{0.0};
    double gamma{0.0};  // (M−1)/t_max over the evaluated window
    double r{kInfiniteRepetitions};
    std::size_t positive_increment_count{0};
};

// Sum of positive increments of `series.D` over points with t ≤ t_max. The
// window ends at the largest grid point ≤ t_max; no interpolation.
NMResult nonmarkovianity(const DistanceSeries& series, double t_max, double r = kInfiniteRepetitions);
// Whole series, with the grid's nominal t_max.
NMResult nonmarkovianity(const DistanceSeries& series);

// Positive total variation of a plain sequence.
double positive_variation(std::span<const double> values);

// QPN standard deviation 2·√(p(1−p)/r) with p = (⟨σ⟩+1)/2. r may be infinite.
double qpn_sigma(double mean_sigma, double r);

// First-order propagation of per-component uncertainties into D. Throws
// DegenerateDistanceError when D ≤ kDistanceFloor.
double delta_D(const Vec3& v1, const Vec3& v2, const Vec3& sigmas1, const Vec3& sigmas2);

struct Increment {
    double dD{0.0};     // D_i − D_{i−1}
    double delta{0.0};  // √(δD_i² + δD_{i−1}²)
};

// Consecutive increments over the first `count` points of the series.
std::vector<Increment> increments(const DistanceSeries& series, std::size_t count);

// Root-sum-square of `delta` over increments with dD > 0.
double delta_N(std::span<const Increment> incs);

// D with δD propagated from the trajectory's sigmas (zero if it has none).
// Degenerate points (D ≤ kDistanceFloor) get the bound ½·√(Σ σ²), the
// largest value the gradient of D allows.
DistanceSeries distance_series(const BlochTrajectory& trajectory);

struct TrueValueOptions {
    double reference_rate{0.0};  // γ₀ in 1/s; 0 means 15/τ
    double multiplier{100.0};
    double check_multiplier{200.0};
    double tolerance{1e-3};
    double noise_floor{1e-9};  // N below this in both runs is rounding residue
};

struct TrueValueEstimate {
    double N_true{0.0};
    double gamma_used{0.0};
    double convergence_ratio{0.0};  // |N(check) − N(reference)| / N(reference)
    double N_check{0.0};
};

// Noiseless N at multiplier·γ₀ with a check at check_multiplier·γ₀. Throws
// ConvergenceError when the relative difference reaches the tolerance.
TrueValueEstimate estimate_true_N(const ModelParams& params, double t_max, const TrueValueOptions& options = {});
TrueValueEstimate estimate_true_N(const SpinProbe& probe, double t_max, const TrueValueOptions& options = {});

struct TrueValueRun {
    TrueValueEstimate estimate;
    DistanceSeries reference;  // noiseless series at multiplier·γ₀ over [0, t_max]
};

// As estimate_true_N, also returning the reference series so shorter windows
// can be read off it without a separate convergence check.
TrueValueRun run_true_value(const SpinProbe& probe, double t_max, const TrueValueOptions& options = {});

// One dense simulation reused for several windows. Windows must not exceed
// the largest entry; results follow the input order.
std::vector<TrueValueEstimate> estimate_true_N(const SpinProbe& probe, std::span<const double> t_max_values,
                                               const TrueValueOptions& options = {});

}  // namespace qprobe
