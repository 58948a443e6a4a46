#include "qprobe/dynamics.hpp"

#include "qprobe/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace qprobe {

namespace {

ComplexMatrix hermitize(const ComplexMatrix& m) { return 0.5 * (m + m.adjoint()); }

Eigen::VectorXcd phases_at(const Eigen::VectorXd& eigenvalues, double t) {
    Eigen::VectorXcd phi(eigenvalues.size());
    for (Eigen::Index j = 0; j < eigenvalues.size(); ++j) phi(j) = std::polar(1.0, -eigenvalues(j) * t);
    return phi;
}

ComplexMatrix psd_sqrt(const ComplexMatrix& m) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m);
    if (es.info() != Eigen::Success) throw NumericError("eigendecomposition failed in matrix square root");
    const Eigen::VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * roots.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

TimeGrid::TimeGrid(double t_max, std::vector<double> times) : t_max_(t_max), times_(std::move(times)) {
    if (!(std::isfinite(t_max_) && t_max_ > 0.0)) throw ParameterError("grid t_max must be positive");
    if (times_.size() < 2) throw ParameterError("grid needs at least 2 points");
    if (times_.front() < 0.0) throw ParameterError("grid times must be non-negative");
    for (std::size_t i = 1; i < times_.size(); ++i)
        if (!(times_[i] > times_[i - 1])) throw ParameterError("grid times must be strictly increasing");
}

TimeGrid TimeGrid::uniform(double t_max, std::size_t sample_count) {
    if (sample_count < 2) throw ParameterError("grid needs at least 2 points");
    std::vector<double> times(sample_count);
    const double dt = t_max / static_cast<double>(sample_count - 1);
    for (std::size_t i = 0; i < sample_count; ++i) times[i] = static_cast<double>(i) * dt;
    times.back() = t_max;
    return TimeGrid(t_max, std::move(times));
}

TimeGrid TimeGrid::with_rate(double t_max, double rate) {
    if (!(std::isfinite(rate) && rate > 0.0)) throw ParameterError("sampling rate must be positive");
    const double intervals = std::max(1.0, std::round(rate * t_max));
    return uniform(t_max, static_cast<std::size_t>(intervals) + 1);
}

TimeGrid TimeGrid::subset(const std::vector<std::size_t>& indices) const {
    std::vector<double> times;
    times.reserve(indices.size());
    for (std::size_t idx : indices) {
        if (idx >= times_.size()) throw ParameterError("grid subset index out of range");
        times.push_back(times_[idx]);
    }
    return TimeGrid(t_max_, std::move(times));
}

ComplexMatrix PropagatorBundle::unitary(double t) const {
    return eigenvectors * phases_at(eigenvalues, t).asDiagonal() * eigenvectors.adjoint();
}

PropagatorBundle diagonalize(const ComplexMatrix& h, const ModelParams& params) {
    if (h.rows() != h.cols()) throw ParameterError("Hamiltonian must be square");
    const double scale = std::max(1.0, max_abs(h));
    if (max_abs(h - h.adjoint()) > 1e-12 * scale) throw ParameterError("Hamiltonian is not Hermitian");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
    if (es.info() != Eigen::Success) throw NumericError("Hamiltonian eigendecomposition did not converge");
    return PropagatorBundle{es.eigenvalues(), es.eigenvectors(), params};
}

DensityMatrix evolve(const PropagatorBundle& bundle, const DensityMatrix& rho0, double t) {
    if (rho0.dim() != bundle.eigenvectors.rows())
        throw ParameterError("state dimension does not match the propagator");
    if (!(t >= 0.0)) throw ParameterError("evolution time must be non-negative");
    if (t == 0.0) return rho0;
    const ComplexMatrix u = bundle.unitary(t);
    return DensityMatrix(hermitize(u * rho0.matrix() * u.adjoint()), rho0.space(),
                         DensityTolerances{1e-9, 1e-12, -1e-8});
}

DensityMatrix partial_trace_env(const DensityMatrix& rho_total) {
    const Eigen::Index dim = rho_total.dim();
    if (rho_total.space() != StateSpace::total || dim % 2 != 0 || dim < 4)
        throw ParameterError("partial trace needs a total-space density matrix");
    const Eigen::Index levels = dim / 2;
    const ComplexMatrix& m = rho_total.matrix();
    ComplexMatrix rs = ComplexMatrix::Zero(2, 2);
    for (Eigen::Index s = 0; s < 2; ++s)
        for (Eigen::Index sp = 0; sp < 2; ++sp)
            rs(s, sp) = m.block(s * levels, sp * levels, levels, levels).trace();
    return DensityMatrix(hermitize(rs), StateSpace::spin, DensityTolerances{1e-9, 1e-12, -1e-8});
}

Vec3 bloch_vector(const DensityMatrix& rho_spin) {
    if (rho_spin.dim() != 2) throw ParameterError("Bloch vector needs a 2x2 density matrix");
    const ComplexMatrix& r = rho_spin.matrix();
    // Tr(ρσ_x) = 2 Re ρ_{↓↑}, Tr(ρσ_y) = 2 Im ρ_{↓↑}, Tr(ρσ_z) = ρ_{↑↑} − ρ_{↓↓}
    return Vec3{2.0 * r(1, 0).real(), 2.0 * r(1, 0).imag(), (r(0, 0) - r(1, 1)).real()};
}

double trace_distance(const Vec3& v1, const Vec3& v2) { return 0.5 * (v1 - v2).norm(); }

double fidelity(const DensityMatrix& rho1, const DensityMatrix& rho2) {
    if (rho1.dim() != rho2.dim()) throw ParameterError("fidelity needs states of equal dimension");
    const ComplexMatrix s1 = psd_sqrt(rho1.matrix());
    const ComplexMatrix inner = hermitize(s1 * rho2.matrix() * s1);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(inner, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("eigendecomposition failed in fidelity");
    if (es.eigenvalues().minCoeff() < -1e-10) throw ParameterError("fidelity input is not positive semidefinite");
    const double f = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    return std::clamp(f, 0.0, 1.0);
}

BlochEvolver::BlochEvolver(const PropagatorBundle& bundle, const DensityMatrix& rho0)
    : eigenvalues_(bundle.eigenvalues) {
    const ComplexMatrix& v = bundle.eigenvectors;
    if (rho0.dim() != v.rows()) throw ParameterError("state dimension does not match the propagator");
    const Eigen::Index levels = v.rows() / 2;
    const Operators ops = build_operators(static_cast<int>(levels - 1), 0);
    const ComplexMatrix rho_e = v.adjoint() * rho0.matrix() * v;
    const ComplexMatrix* paulis[3] = {&ops.sigma_x, &ops.sigma_y, &ops.sigma_z};
    for (int l = 0; l < 3; ++l) {
        const ComplexMatrix obs_e = v.adjoint() * ops.spin_op(*paulis[l]) * v;
        weights_[l] = rho_e.cwiseProduct(obs_e.transpose());
    }
}

Vec3 BlochEvolver::at(double t) const {
    const Eigen::VectorXcd phi = phases_at(eigenvalues_, t);
    const Eigen::VectorXcd phi_conj = phi.conjugate();
    Vec3 out;
    for (int l = 0; l < 3; ++l) out(l) = phi_conj.dot(weights_[l] * phi_conj).real();  // dot conjugates its left operand
    return out;
}

SpinProbe::SpinProbe(const ModelParams& params)
    : bundle_(diagonalize(build_hamiltonian(params), params)),
      up_(bundle_, initial_state(SpinLabel::up, params.nbar, params.n_cut)),
      down_(bundle_, initial_state(SpinLabel::down, params.nbar, params.n_cut)) {}

BlochTrajectory SpinProbe::trajectory(const TimeGrid& grid) const {
    BlochTrajectory traj{grid, {}, {}, {}, {}};
    traj.vectors1.reserve(grid.size());
    traj.vectors2.reserve(grid.size());
    for (double t : grid.times()) {
        traj.vectors1.push_back(up_.at(t));
        traj.vectors2.push_back(down_.at(t));
    }
    return traj;
}

DistanceSeries distances(const BlochTrajectory& trajectory) {
    const std::size_t m = trajectory.grid.size();
    if (trajectory.vectors1.size() != m || trajectory.vectors2.size() != m)
        throw ParameterError("trajectory length does not match its grid");
    DistanceSeries series{trajectory.grid, std::vector<double>(m), std::vector<double>(m, 0.0)};
    for (std::size_t i = 0; i < m; ++i) series.D[i] = trace_distance(trajectory.vectors1[i], trajectory.vectors2[i]);
    return series;
}

std::pair<BlochTrajectory, DistanceSeries> simulate_distance_series(const ModelParams& params,
                                                                    const TimeGrid& grid) {
    const SpinProbe probe(params);
    BlochTrajectory traj = probe.trajectory(grid);
    DistanceSeries series = distances(traj);
    return {std::move(traj), std::move(series)};
}

}  // namespace qprobe
