#include "qprobe/qpn.hpp"

#include "qprobe/errors.hpp"
#include "qprobe/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qprobe {

namespace {

// substream tags; one per independent use of the root seed
enum StreamTag : std::uint64_t {
    kMeasureStream = 1,
    kSeriesStream = 2,
    kRecordStream = 3,
    kResampleRStream = 4,
    kGammaNoiseStream = 5,
    kGammaSubsetStream = 6,
    kBiasStream = 7,
};

struct Moments {
    double mean{0.0};
    double sd{0.0};
};

Moments moments(std::span<const double> xs) {
    Moments m;
    if (xs.empty()) return m;
    m.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - m.mean) * (x - m.mean);
        m.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return m;
}

Vec3 sigmas_of(const Vec3& v, double r) {
    return Vec3{qpn_sigma(v(0), r), qpn_sigma(v(1), r), qpn_sigma(v(2), r)};
}

void require_finite_integer_r(double r) {
    if (!(std::isfinite(r) && r >= 1.0 && std::floor(r) == r))
        throw ParameterError("binomial noise needs a finite integer r");
}

}  // namespace

void QPNConfig::validate() const {
    if (!(r >= 1.0)) throw ParameterError("repetitions r must be at least 1");
    if (noise == NoiseModel::binomial) require_finite_integer_r(r);
    if (k_series < 1 || k_measure < 1) throw ParameterError("replica counts must be at least 1");
    if (resample_iterations < 1) throw ParameterError("resample iterations must be at least 1");
}

bool QPNConfig::noiseless() const noexcept { return noise == NoiseModel::none || std::isinf(r); }

BlochTrajectory inject_qpn(const BlochTrajectory& truth, const QPNConfig& config, Rng& rng) {
    config.validate();
    const std::size_t m = truth.grid.size();
    if (truth.vectors1.size() != m || truth.vectors2.size() != m)
        throw ParameterError("trajectory length does not match its grid");

    BlochTrajectory out{truth.grid, truth.vectors1, truth.vectors2, {}, {}};
    out.sigmas1.resize(m);
    out.sigmas2.resize(m);
    const double r = config.noiseless() ? kInfiniteRepetitions : config.r;
    std::normal_distribution<double> normal(0.0, 1.0);

    for (std::size_t i = 0; i < m; ++i) {
        Vec3* vecs[2] = {&out.vectors1[i], &out.vectors2[i]};
        Vec3* sigs[2] = {&out.sigmas1[i], &out.sigmas2[i]};
        for (int s = 0; s < 2; ++s) {
            Vec3& v = *vecs[s];
            *sigs[s] = sigmas_of(v, r);
            if (std::isinf(r)) continue;
            for (int l = 0; l < 3; ++l) {
                if (config.noise == NoiseModel::gaussian) {
                    v(l) += (*sigs[s])(l) * normal(rng);
                } else {
                    const double p = std::clamp(0.5 * (v(l) + 1.0), 0.0, 1.0);
                    const auto trials = static_cast<std::int64_t>(r);
                    std::binomial_distribution<std::int64_t> binom(trials, p);
                    v(l) = 2.0 * static_cast<double>(binom(rng)) / r - 1.0;
                }
            }
        }
    }
    return out;
}

std::vector<MeasureSummary> noisy_measure(const BlochTrajectory& truth, const QPNConfig& config,
                                          std::span<const double> t_max_values, std::uint64_t stream) {
    config.validate();
    const std::size_t windows = t_max_values.size();
    const std::size_t k = config.noiseless() ? 1 : config.k_measure;
    std::vector<std::vector<double>> values(windows, std::vector<double>(k));
    std::vector<double> delta_sum(windows, 0.0);

    for (std::size_t j = 0; j < k; ++j) {
        Rng rng = substream(config.seed, {kMeasureStream, stream, j});
        const DistanceSeries series = distance_series(inject_qpn(truth, config, rng));
        for (std::size_t w = 0; w < windows; ++w) {
            const NMResult nm = nonmarkovianity(series, t_max_values[w], config.r);
            values[w][j] = nm.value;
            delta_sum[w] += nm.uncertainty;
        }
    }

    std::vector<MeasureSummary> out(windows);
    for (std::size_t w = 0; w < windows; ++w) {
        const Moments mom = moments(values[w]);
        // window metadata from the truth grid
        const DistanceSeries shape{truth.grid, std::vector<double>(truth.grid.size(), 0.0), {}};
        NMResult res = nonmarkovianity(shape, t_max_values[w], config.noiseless() ? kInfiniteRepetitions : config.r);
        res.value = mom.mean;
        res.uncertainty = delta_sum[w] / static_cast<double>(k);
        res.positive_increment_count = 0;
        out[w] = MeasureSummary{res, mom.sd, std::move(values[w])};
    }
    return out;
}

MeasureSummary noisy_measure(const ModelParams& params, const TimeGrid& grid, const QPNConfig& config,
                             double t_max) {
    const SpinProbe probe(params);
    const double windows[] = {t_max};
    return noisy_measure(probe.trajectory(grid), config, windows).front();
}

DistanceSeries mean_noisy_distance(const BlochTrajectory& truth, const QPNConfig& config, std::uint64_t stream) {
    config.validate();
    const std::size_t m = truth.grid.size();
    BlochTrajectory with_sigmas = truth;
    with_sigmas.sigmas1.resize(m);
    with_sigmas.sigmas2.resize(m);
    const double r = config.noiseless() ? kInfiniteRepetitions : config.r;
    for (std::size_t i = 0; i < m; ++i) {
        with_sigmas.sigmas1[i] = sigmas_of(truth.vectors1[i], r);
        with_sigmas.sigmas2[i] = sigmas_of(truth.vectors2[i], r);
    }
    DistanceSeries out = distance_series(with_sigmas);
    if (config.noiseless()) return out;

    std::vector<double> sum(m, 0.0);
    for (std::size_t j = 0; j < config.k_series; ++j) {
        Rng rng = substream(config.seed, {kSeriesStream, stream, j});
        const DistanceSeries noisy = distances(inject_qpn(truth, config, rng));
        for (std::size_t i = 0; i < m; ++i) sum[i] += noisy.D[i];
    }
    for (std::size_t i = 0; i < m; ++i) out.D[i] = sum[i] / static_cast<double>(config.k_series);
    return out;
}

OutcomeRecords::OutcomeRecords(TimeGrid grid, std::size_t r0)
    : grid_(std::move(grid)), r0_(r0), bits_(grid_.size() * 6 * r0, 0) {
    if (r0 < 1) throw ParameterError("r0 must be at least 1");
}

std::span<std::uint8_t> OutcomeRecords::outcomes(std::size_t i, int m, int l) {
    const std::size_t offset = ((i * 2 + static_cast<std::size_t>(m)) * 3 + static_cast<std::size_t>(l)) * r0_;
    return std::span<std::uint8_t>(bits_).subspan(offset, r0_);
}

std::span<const std::uint8_t> OutcomeRecords::outcomes(std::size_t i, int m, int l) const {
    const std::size_t offset = ((i * 2 + static_cast<std::size_t>(m)) * 3 + static_cast<std::size_t>(l)) * r0_;
    return std::span<const std::uint8_t>(bits_).subspan(offset, r0_);
}

OutcomeRecords record_outcomes(const BlochTrajectory& truth, std::size_t r0, Rng& rng) {
    OutcomeRecords records(truth.grid, r0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (std::size_t i = 0; i < truth.grid.size(); ++i) {
        const Vec3* vecs[2] = {&truth.vectors1[i], &truth.vectors2[i]};
        for (int m = 0; m < 2; ++m) {
            for (int l = 0; l < 3; ++l) {
                const double p = std::clamp(0.5 * ((*vecs[m])(l) + 1.0), 0.0, 1.0);
                for (auto& bit : records.outcomes(i, m, l)) bit = uniform(rng) < p ? 1 : 0;
            }
        }
    }
    return records;
}

BlochTrajectory resample_r(const OutcomeRecords& records, std::size_t r, Rng& rng) {
    if (r < 1 || r > records.r0()) throw ParameterError("subensemble size must lie in [1, r0]");
    const std::size_t m = records.grid().size();
    BlochTrajectory out{records.grid(), std::vector<Vec3>(m), std::vector<Vec3>(m), std::vector<Vec3>(m),
                        std::vector<Vec3>(m)};
    std::vector<std::uint8_t> picked(r);
    const auto rd = static_cast<double>(r);
    for (std::size_t i = 0; i < m; ++i) {
        Vec3* vecs[2] = {&out.vectors1[i], &out.vectors2[i]};
        Vec3* sigs[2] = {&out.sigmas1[i], &out.sigmas2[i]};
        for (int s = 0; s < 2; ++s) {
            for (int l = 0; l < 3; ++l) {
                const auto all = records.outcomes(i, s, l);
                std::size_t ups = 0;
                if (r == records.r0()) {
                    ups = static_cast<std::size_t>(std::count(all.begin(), all.end(), std::uint8_t{1}));
                } else {
                    std::sample(all.begin(), all.end(), picked.begin(), r, rng);
                    ups = static_cast<std::size_t>(std::count(picked.begin(), picked.end(), std::uint8_t{1}));
                }
                const double mean = 2.0 * static_cast<double>(ups) / rd - 1.0;
                (*vecs[s])(l) = mean;
                (*sigs[s])(l) = qpn_sigma(mean, rd);
            }
        }
    }
    return out;
}

DistanceSeries resample_gamma(const DistanceSeries& series, std::size_t M, Rng& rng) {
    const std::size_t m0 = series.D.size();
    if (M < 2 || M > m0) throw ParameterError("subset size M must lie in [2, M0]");
    std::vector<std::size_t> all(m0);
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::vector<std::size_t> chosen(M);
    if (M == m0) {
        chosen = all;
    } else {
        // selection sampling keeps the input order
        std::sample(all.begin(), all.end(), chosen.begin(), M, rng);
    }
    DistanceSeries out{series.grid.subset(chosen), std::vector<double>(M), std::vector<double>(M, 0.0)};
    const bool has_delta = series.deltaD.size() == m0;
    for (std::size_t k = 0; k < M; ++k) {
        out.D[k] = series.D[chosen[k]];
        if (has_delta) out.deltaD[k] = series.deltaD[chosen[k]];
    }
    return out;
}

std::vector<ScanPoint> r_postselection_scan(const BlochTrajectory& truth, const QPNConfig& config,
                                            std::span<const std::size_t> r_values, double t_max) {
    config.validate();
    if (!std::isfinite(config.r)) throw ParameterError("postselection needs a finite r0");
    const auto r0 = static_cast<std::size_t>(config.r);
    Rng record_rng = substream(config.seed, {kRecordStream});
    const OutcomeRecords records = record_outcomes(truth, r0, record_rng);

    std::vector<ScanPoint> out;
    std::vector<double> ns(config.resample_iterations);
    for (std::size_t r : r_values) {
        for (std::size_t it = 0; it < config.resample_iterations; ++it) {
            Rng rng = substream(config.seed, {kResampleRStream, r, it});
            ns[it] = nonmarkovianity(distance_series(resample_r(records, r, rng)), t_max).value;
        }
        const Moments mom = moments(ns);
        out.push_back({static_cast<double>(r), mom.mean, mom.sd});
    }
    return out;
}

std::vector<ScanPoint> gamma_postselection_scan(const BlochTrajectory& truth, const QPNConfig& config,
                                                std::span<const std::size_t> M_values, double t_max) {
    config.validate();
    const std::size_t iters = config.resample_iterations;
    std::vector<std::vector<double>> ns(M_values.size(), std::vector<double>(iters));
    for (std::size_t it = 0; it < iters; ++it) {
        Rng noise_rng = substream(config.seed, {kGammaNoiseStream, it});
        const DistanceSeries noisy = distance_series(inject_qpn(truth, config, noise_rng));
        for (std::size_t k = 0; k < M_values.size(); ++k) {
            Rng rng = substream(config.seed, {kGammaSubsetStream, M_values[k], it});
            ns[k][it] = nonmarkovianity(resample_gamma(noisy, M_values[k], rng), t_max).value;
        }
    }
    std::vector<ScanPoint> out;
    for (std::size_t k = 0; k < M_values.size(); ++k) {
        const Moments mom = moments(ns[k]);
        out.push_back({static_cast<double>(M_values[k] - 1) / t_max, mom.mean, mom.sd});
    }
    return out;
}

BiasSurface bias_surface(const SpinProbe& probe, double t_max, std::span<const double> gamma_grid,
                         std::span<const double> r_grid, const QPNConfig& config, double N_true,
                         std::size_t threads) {
    config.validate();
    if (gamma_grid.empty() || r_grid.empty()) throw ParameterError("bias grids must be non-empty");
    for (double r : r_grid)
        if (!(r >= 1.0)) throw ParameterError("bias r grid entries must be at least 1");

    const std::size_t ng = gamma_grid.size();
    const std::size_t nr = r_grid.size();
    BiasSurface out;
    out.r_grid.assign(r_grid.begin(), r_grid.end());
    out.gamma_grid.resize(ng);
    out.N_mean.resize(static_cast<Eigen::Index>(ng), static_cast<Eigen::Index>(nr));
    out.N_std.resizeLike(out.N_mean);
    out.B.resizeLike(out.N_mean);
    out.N_true = N_true;

    std::vector<BlochTrajectory> truths;
    truths.reserve(ng);
    for (std::size_t g = 0; g < ng; ++g) {
        truths.push_back(probe.trajectory(TimeGrid::with_rate(t_max, gamma_grid[g])));
        out.gamma_grid[g] = truths.back().grid.rate();
    }

    parallel_for(ng * nr, threads, [&](std::size_t cell) {
        const std::size_t g = cell / nr;
        const std::size_t c = cell % nr;
        QPNConfig cell_config = config;
        cell_config.r = r_grid[c];
        if (cell_config.noise == NoiseModel::binomial && std::isinf(cell_config.r))
            cell_config.noise = NoiseModel::none;
        const double windows[] = {t_max};
        const MeasureSummary s =
            noisy_measure(truths[g], cell_config, windows, splitmix64(kBiasStream ^ splitmix64(cell))).front();
        const auto gi = static_cast<Eigen::Index>(g);
        const auto ci = static_cast<Eigen::Index>(c);
        out.B(gi, ci) = s.result.value - N_true;
        out.N_mean(gi, ci) = out.B(gi, ci) + N_true;
        out.N_std(gi, ci) = s.spread;
    });
    return out;
}

BiasSurface bias_surface(const ModelParams& params, double t_max, std::span<const double> gamma_grid,
                         std::span<const double> r_grid, const QPNConfig& config, const TrueValueOptions& truth,
                         std::size_t threads) {
    const SpinProbe probe(params);
    const double n_true = estimate_true_N(probe, t_max, truth).N_true;
    return bias_surface(probe, t_max, gamma_grid, r_grid, config, n_true, threads);
}

DistanceSeries add_distance_noise(const DistanceSeries& series, double sigma_D, Rng& rng) {
    if (!(sigma_D >= 0.0)) throw ParameterError("noise level must be non-negative");
    DistanceSeries out = series;
    std::normal_distribution<double> normal(0.0, sigma_D);
    if (sigma_D > 0.0)
        for (double& d : out.D) d += normal(rng);
    out.deltaD.assign(out.D.size(), sigma_D);
    return out;
}

double effective_coupling(double Omega, double delta_omega) { return std::hypot(Omega, delta_omega); }

double resonance_amplitude(double Omega, double delta_omega) {
    if (!(Omega > 0.0)) throw ParameterError("Omega must be positive");
    const double eff = effective_coupling(Omega, delta_omega);
    return (Omega * Omega) / (eff * eff);
}

}  // namespace qprobe
