#include "qprobe/blp.hpp"

#include "qprobe/errors.hpp"

#include <algorithm>
#include <cmath>

namespace qprobe {

namespace {

// Number of leading grid points with t ≤ t_max.
std::size_t window_count(const TimeGrid& grid, double t_max) {
    const double limit = t_max * (1.0 + 1e-12);
    const auto& times = grid.times();
    return static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), limit) - times.begin());
}

double reference_rate(const ModelParams& params, const TrueValueOptions& options) {
    if (options.reference_rate > 0.0) return options.reference_rate;
    return kReferenceRatePerTau / params.tau();
}

}  // namespace

NMResult nonmarkovianity(const DistanceSeries& series, double t_max, double r) {
    if (series.D.size() != series.grid.size()) throw ParameterError("series length does not match its grid");
    if (series.D.size() < 2) throw ParameterError("N needs at least 2 points");
    if (!(t_max > 0.0) || t_max > series.grid.t_max() * (1.0 + 1e-12))
        throw ParameterError("t_max must lie within the series window");
    const std::size_t count = window_count(series.grid, t_max);
    if (count < 2) throw ParameterError("fewer than 2 points at or before t_max");

    NMResult out;
    out.t_max = t_max;
    out.gamma = static_cast<double>(count - 1) / t_max;
    out.r = r;
    for (std::size_t i = 1; i < count; ++i) {
        const double inc = series.D[i] - series.D[i - 1];
        if (inc > 0.0) {
            out.value += inc;
            ++out.positive_increment_count;
        }
    }
    if (series.deltaD.size() == series.D.size()) {
        const auto incs = increments(series, count);
        out.uncertainty = delta_N(incs);
    }
    return out;
}

NMResult nonmarkovianity(const DistanceSeries& series) { return nonmarkovianity(series, series.grid.t_max()); }

double positive_variation(std::span<const double> values) {
    double sum = 0.0;
    for (std::size_t i = 1; i < values.size(); ++i) sum += std::max(0.0, values[i] - values[i - 1]);
    return sum;
}

double qpn_sigma(double mean_sigma, double r) {
    if (!std::isfinite(mean_sigma) || std::abs(mean_sigma) > 1.0 + 1e-9)
        throw ParameterError("expectation value must lie in [-1, 1]");
    if (!(r >= 1.0)) throw ParameterError("repetitions must be at least 1");
    if (std::isinf(r)) return 0.0;
    const double p = std::clamp(0.5 * (mean_sigma + 1.0), 0.0, 1.0);
    return 2.0 * std::sqrt(p * (1.0 - p) / r);
}

double delta_D(const Vec3& v1, const Vec3& v2, const Vec3& sigmas1, const Vec3& sigmas2) {
    const double d = trace_distance(v1, v2);
    if (!(d > kDistanceFloor)) throw DegenerateDistanceError(d);
    // ∂D/∂⟨σ_l^1⟩ = (v1_l − v2_l)/(4D), opposite sign for the second state
    const Vec3 grad = (v1 - v2) / (4.0 * d);
    return std::sqrt(grad.cwiseProduct(sigmas1).squaredNorm() + grad.cwiseProduct(sigmas2).squaredNorm());
}

std::vector<Increment> increments(const DistanceSeries& series, std::size_t count) {
    if (count > series.D.size() || count > series.deltaD.size())
        throw ParameterError("increment count exceeds series length");
    std::vector<Increment> out;
    if (count < 2) return out;
    out.reserve(count - 1);
    for (std::size_t i = 1; i < count; ++i) {
        out.push_back({series.D[i] - series.D[i - 1], std::hypot(series.deltaD[i], series.deltaD[i - 1])});
    }
    return out;
}

double delta_N(std::span<const Increment> incs) {
    double sum = 0.0;
    for (const auto& inc : incs)
        if (inc.dD > 0.0) sum += inc.delta * inc.delta;
    return std::sqrt(sum);
}

DistanceSeries distance_series(const BlochTrajectory& trajectory) {
    DistanceSeries series = distances(trajectory);
    if (!trajectory.has_sigmas()) return series;
    const std::size_t m = series.D.size();
    if (trajectory.sigmas1.size() != m || trajectory.sigmas2.size() != m)
        throw ParameterError("trajectory sigmas do not match its grid");
    for (std::size_t i = 0; i < m; ++i) {
        const Vec3& s1 = trajectory.sigmas1[i];
        const Vec3& s2 = trajectory.sigmas2[i];
        if (series.D[i] > kDistanceFloor) {
            series.deltaD[i] = delta_D(trajectory.vectors1[i], trajectory.vectors2[i], s1, s2);
        } else {
            series.deltaD[i] = 0.5 * std::sqrt(s1.squaredNorm() + s2.squaredNorm());
        }
    }
    return series;
}

TrueValueEstimate estimate_true_N(const ModelParams& params, double t_max, const TrueValueOptions& options) {
    return estimate_true_N(SpinProbe(params), t_max, options);
}

TrueValueEstimate estimate_true_N(const SpinProbe& probe, double t_max, const TrueValueOptions& options) {
    const double windows[] = {t_max};
    return estimate_true_N(probe, windows, options).front();
}

namespace {

struct DenseSeries {
    DistanceSeries reference;
    DistanceSeries check;
    double gamma_used;
};

DenseSeries dense_series(const SpinProbe& probe, double t_max, const TrueValueOptions& options) {
    if (!(options.multiplier > 0.0 && options.check_multiplier > 0.0 && options.tolerance > 0.0))
        throw ParameterError("true-value options must be positive");
    const double gamma0 = reference_rate(probe.params(), options);
    const TimeGrid ref_grid = TimeGrid::with_rate(t_max, options.multiplier * gamma0);
    const TimeGrid check_grid = TimeGrid::with_rate(t_max, options.check_multiplier * gamma0);
    return {distances(probe.trajectory(ref_grid)), distances(probe.trajectory(check_grid)),
            options.multiplier * gamma0};
}

TrueValueEstimate checked_estimate(const DenseSeries& dense, double t_max, const TrueValueOptions& options) {
    const double n_ref = nonmarkovianity(dense.reference, t_max).value;
    const double n_check = nonmarkovianity(dense.check, t_max).value;
    // both at the rounding floor: the relative test is meaningless, report an exact zero
    if (n_ref <= options.noise_floor && n_check <= options.noise_floor) return {0.0, dense.gamma_used, 0.0, 0.0};
    double ratio = 0.0;
    if (n_ref > 0.0) {
        ratio = std::abs(n_check - n_ref) / n_ref;
    } else if (n_check > 0.0) {
        ratio = std::numeric_limits<double>::infinity();
    }
    if (!(ratio < options.tolerance)) throw ConvergenceError(n_ref, n_check, ratio);
    return {n_ref, dense.gamma_used, ratio, n_check};
}

}  // namespace

TrueValueRun run_true_value(const SpinProbe& probe, double t_max, const TrueValueOptions& options) {
    DenseSeries dense = dense_series(probe, t_max, options);
    const TrueValueEstimate estimate = checked_estimate(dense, t_max, options);
    return {estimate, std::move(dense.reference)};
}

std::vector<TrueValueEstimate> estimate_true_N(const SpinProbe& probe, std::span<const double> t_max_values,
                                               const TrueValueOptions& options) {
    if (t_max_values.empty()) return {};
    const double longest = *std::max_element(t_max_values.begin(), t_max_values.end());
    const DenseSeries dense = dense_series(probe, longest, options);
    std::vector<TrueValueEstimate> out;
    out.reserve(t_max_values.size());
    for (double t_max : t_max_values) out.push_back(checked_estimate(dense, t_max, options));
    return out;
}

}  // namespace qprobe
