#include "oracles.hpp"

#include "qprobe/dynamics.hpp"
#include "qprobe/errors.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace qprobe;

namespace {

ModelParams reference_params(double nbar = 1.0) {
    ModelParams p;
    p.omega_E = kTwoPi * 1.92e6;
    p.omega_z = p.omega_E;
    p.Omega = kTwoPi * 100e3;
    p.eta = 0.32;
    p.nbar = nbar;
    return p;
}

ModelParams small_params(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ModelParams p;
    p.omega_E = kTwoPi * 1.92e6;
    p.omega_z = p.omega_E * (0.8 + 0.4 * u(rng));
    p.Omega = kTwoPi * (50e3 + 100e3 * u(rng));
    p.eta = 0.5 * u(rng);
    p.nbar = 1.5 * u(rng);
    p.n_cut = 5;
    p.n_pad = 10;
    return p;
}

DensityMatrix random_state(Eigen::Index dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    ComplexMatrix a(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) a(i, j) = cplx(g(rng), g(rng));
    ComplexMatrix rho = a * a.adjoint();
    rho /= rho.trace();
    rho = 0.5 * (rho + rho.adjoint());
    return DensityMatrix(rho, StateSpace::total);
}

DensityMatrix spin_state(const Vec3& v) {
    ComplexMatrix m(2, 2);
    m(0, 0) = 0.5 * (1.0 + v(2));
    m(1, 1) = 0.5 * (1.0 - v(2));
    m(0, 1) = 0.5 * cplx(v(0), -v(1));
    m(1, 0) = 0.5 * cplx(v(0), v(1));
    return DensityMatrix(m, StateSpace::spin);
}

}  // namespace

TEST_CASE("time grid construction and rate") {
    const TimeGrid g = TimeGrid::uniform(9.0, 136);
    CHECK(g.size() == 136);
    CHECK(g.times().front() == 0.0);
    CHECK(g.times().back() == 9.0);
    CHECK(g.rate() == doctest::Approx(15.0));
    CHECK(TimeGrid::with_rate(9.0, 15.0).size() == 136);
    CHECK_THROWS_AS(TimeGrid::uniform(9.0, 1), ParameterError);
    CHECK_THROWS_AS(TimeGrid(1.0, {0.0, 0.5, 0.5}), ParameterError);
    const TimeGrid sub = g.subset({3, 7, 9});
    CHECK(sub.t_max() == 9.0);
    CHECK(sub.rate() == doctest::Approx(2.0 / 9.0));
}

TEST_CASE("diagonalize: decoupled and carrier-only spectra") {
    ModelParams p = reference_params();
    p.n_cut = 6;
    p.Omega = 0.0;
    const PropagatorBundle free = diagonalize(build_hamiltonian(p), p);
    std::vector<double> expected;
    for (int n = 0; n <= p.n_cut; ++n)
        for (double s : {0.5, -0.5}) expected.push_back(s * p.omega_z + n * p.omega_E);
    std::sort(expected.begin(), expected.end());
    for (std::size_t k = 0; k < expected.size(); ++k)
        CHECK(std::abs(free.eigenvalues(static_cast<Eigen::Index>(k)) - expected[k]) < 1e-9 * p.omega_E * p.n_cut);

    // eta = 0: each Fock sector is a 2x2 block with splitting √(ω_z² + Ω²)
    ModelParams c = reference_params();
    c.n_cut = 6;
    c.eta = 0.0;
    c.omega_z = 0.7 * c.omega_E;
    const PropagatorBundle carrier = diagonalize(build_hamiltonian(c), c);
    expected.clear();
    const double half = 0.5 * std::hypot(c.omega_z, c.Omega);
    for (int n = 0; n <= c.n_cut; ++n)
        for (double s : {half, -half}) expected.push_back(n * c.omega_E + s);
    std::sort(expected.begin(), expected.end());
    for (std::size_t k = 0; k < expected.size(); ++k)
        CHECK(std::abs(carrier.eigenvalues(static_cast<Eigen::Index>(k)) - expected[k]) < 1e-9 * c.omega_E * c.n_cut);
}

TEST_CASE("diagonalize: reconstruction and unitarity for the reference parameters") {
    const ModelParams p = reference_params();
    const ComplexMatrix h = build_hamiltonian(p);
    const PropagatorBundle b = diagonalize(h, p);
    const ComplexMatrix& v = b.eigenvectors;
    CHECK(max_abs(v * b.eigenvalues.cast<cplx>().asDiagonal() * v.adjoint() - h) < 1e-9 * max_abs(h));
    const ComplexMatrix vhv = v.adjoint() * h * v;
    CHECK(max_abs(vhv - ComplexMatrix(vhv.diagonal().asDiagonal())) < 1e-9 * max_abs(h));
    for (double s : {0.0, 0.37, 4.5, 9.0}) {
        const ComplexMatrix u = b.unitary(s * p.tau());
        CHECK(max_abs(u.adjoint() * u - ComplexMatrix::Identity(42, 42)) < 1e-9);
    }
    ComplexMatrix bad = h;
    bad(0, 1) += cplx(1.0, 0.0);
    CHECK_THROWS_AS(diagonalize(bad, p), ParameterError);
}

TEST_CASE("evolve: identity at t = 0, purity and group property") {
    const ModelParams p = reference_params();
    const PropagatorBundle b = diagonalize(build_hamiltonian(p), p);
    const DensityMatrix rho0 = initial_state(SpinLabel::up, p.nbar, p.n_cut);
    CHECK(evolve(b, rho0, 0.0).matrix() == rho0.matrix());

    const double tau = p.tau();
    for (double s : {0.3, 2.0, 6.1, 9.0}) {
        const DensityMatrix rt = evolve(b, rho0, s * tau);
        CHECK(std::abs(rt.purity() - rho0.purity()) < 1e-9);
        CHECK(std::abs(rt.matrix().trace() - cplx(1.0, 0.0)) < 1e-9);
    }
    const DensityMatrix split = evolve(b, evolve(b, rho0, 1.3 * tau), 2.9 * tau);
    const DensityMatrix whole = evolve(b, rho0, 4.2 * tau);
    CHECK(max_abs(split.matrix() - whole.matrix()) < 1e-9);

    CHECK_THROWS_AS(evolve(b, initial_state(SpinLabel::up, 0.0, 5), tau), ParameterError);
    CHECK_THROWS_AS(evolve(b, rho0, -1.0), ParameterError);
}

TEST_CASE("evolve: resonant |down,0> is nearly stationary (RK4 oracle)") {
    ModelParams p = reference_params(0.0);
    p.n_cut = 5;
    const ComplexMatrix h = build_hamiltonian(p);
    const PropagatorBundle b = diagonalize(h, p);
    const Eigen::Index down0 = p.n_cut + 1;  // |↓, 0⟩
    Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(h.rows());
    psi0(down0) = 1.0;

    const double t_end = 9.0 * p.tau();
    const std::size_t steps = 600000;
    double leak_oracle = 0.0;
    double max_diff = 0.0;
    std::size_t counter = 0;
    ComplexMatrix rho0 = psi0 * psi0.adjoint();
    const DensityMatrix start(rho0, StateSpace::total);
    oracle::rk4_schrodinger(h, psi0, t_end, steps, [&](double t, const Eigen::VectorXcd& psi) {
        const double leak = 1.0 - std::norm(psi(down0));
        leak_oracle = std::max(leak_oracle, leak);
        if (counter++ % 20000 == 0) {
            const double pop = evolve(b, start, t).matrix()(down0, down0).real();
            max_diff = std::max(max_diff, std::abs((1.0 - pop) - leak));
        }
    });
    // frozen from this RK4 run (600k steps)
    CHECK(leak_oracle == doctest::Approx(0.0024895986).epsilon(1e-6));
    CHECK(leak_oracle < 0.05);
    CHECK(max_diff < 1e-6);
}

TEST_CASE("evolve: eigendecomposition matches a high-order Taylor integrator") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 3; ++trial) {
        const ModelParams p = small_params(rng);
        const ComplexMatrix h = build_hamiltonian(p);
        const PropagatorBundle b = diagonalize(h, p);
        const DensityMatrix rho0 = initial_state(trial % 2 ? SpinLabel::down : SpinLabel::up, p.nbar, p.n_cut);
        const double t_end = 9.0 * p.tau();
        const auto steps = static_cast<std::size_t>(std::ceil(t_end / oracle::taylor_step(h, 0.5)));
        const oracle::TaylorStepper stepper(h, t_end / static_cast<double>(steps), 20);
        ComplexMatrix rho = rho0.matrix();
        double err = 0.0;
        for (std::size_t s = 1; s <= steps; ++s) {
            rho = stepper.advance(rho);
            if (s % 500 == 0 || s == steps) {
                const double t = t_end * static_cast<double>(s) / static_cast<double>(steps);
                err = std::max(err, max_abs(evolve(b, rho0, t).matrix() - rho));
            }
        }
        CHECK(err < 1e-6);
    }
}

TEST_CASE("partial trace: products, entanglement and observable consistency") {
    const DensityMatrix prod = initial_state(SpinLabel::down, 0.7, 4);
    const DensityMatrix rs = partial_trace_env(prod);
    CHECK(std::abs(rs.matrix()(1, 1) - cplx(1.0, 0.0)) < 1e-15);
    CHECK(std::abs(rs.matrix()(0, 0)) < 1e-15);

    const Eigen::Index levels = 4;
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(2 * levels);
    psi(0) = psi(levels + 1) = 1.0 / std::sqrt(2.0);  // (|↑,0⟩ + |↓,1⟩)/√2
    const DensityMatrix bell(psi * psi.adjoint(), StateSpace::total);
    CHECK(max_abs(partial_trace_env(bell).matrix() - 0.5 * ComplexMatrix::Identity(2, 2)) < 1e-15);

    std::mt19937_64 rng(11);
    const Operators ops = build_operators(static_cast<int>(levels) - 1, 0);
    for (int k = 0; k < 10; ++k) {
        const DensityMatrix rho = random_state(2 * levels, rng);
        const DensityMatrix red = partial_trace_env(rho);
        CHECK(std::abs(red.matrix().trace() - rho.matrix().trace()) < 1e-14);
        const cplx total = (rho.matrix() * ops.spin_op(ops.sigma_z)).trace();
        CHECK(std::abs(bloch_vector(red)(2) - total.real()) < 1e-12);
    }
    CHECK_THROWS_AS(partial_trace_env(rs), ParameterError);
}

TEST_CASE("Bloch vectors and trace distance") {
    CHECK((bloch_vector(spin_state(Vec3(0, 0, 1))) - Vec3(0, 0, 1)).norm() < 1e-15);
    CHECK(bloch_vector(spin_state(Vec3(0, 0, 0))).norm() < 1e-15);
    ComplexMatrix plus = ComplexMatrix::Constant(2, 2, 0.5);
    CHECK((bloch_vector(DensityMatrix(plus, StateSpace::spin)) - Vec3(1, 0, 0)).norm() < 1e-15);
    CHECK((bloch_vector(spin_state(Vec3(0.1, -0.4, 0.3))) - Vec3(0.1, -0.4, 0.3)).norm() < 1e-15);

    CHECK(trace_distance(Vec3(0, 0, 1), Vec3(0, 0, -1)) == 1.0);
    CHECK(trace_distance(Vec3(0.3, 0.1, 0.2), Vec3(0.3, 0.1, 0.2)) == 0.0);
    CHECK(trace_distance(Vec3(1, 0, 0), Vec3(0, 1, 0)) == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-15));
}

TEST_CASE("fidelity: identical, orthogonal, mixed-vs-pure, symmetric") {
    const DensityMatrix up = spin_state(Vec3(0, 0, 1));
    const DensityMatrix down = spin_state(Vec3(0, 0, -1));
    const DensityMatrix mixed = spin_state(Vec3(0, 0, 0));
    CHECK(fidelity(up, up) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fidelity(up, down) < 1e-7);
    CHECK(fidelity(mixed, up) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-10));

    // closed-form qubit fidelity: F² = Tr(ρσ) + 2√(det ρ det σ)
    const DensityMatrix a = spin_state(Vec3(0.2, -0.3, 0.5));
    const DensityMatrix b = spin_state(Vec3(-0.4, 0.1, 0.6));
    const double det_a = 0.25 * (1.0 - Vec3(0.2, -0.3, 0.5).squaredNorm());
    const double det_b = 0.25 * (1.0 - Vec3(-0.4, 0.1, 0.6).squaredNorm());
    const double f2 = (a.matrix() * b.matrix()).trace().real() + 2.0 * std::sqrt(det_a * det_b);
    CHECK(fidelity(a, b) == doctest::Approx(std::sqrt(f2)).epsilon(1e-10));
    CHECK(std::abs(fidelity(a, b) - fidelity(b, a)) < 1e-10);
    CHECK_THROWS_AS(fidelity(a, initial_state(SpinLabel::up, 0.0, 2)), ParameterError);
}

TEST_CASE("Bloch evolver agrees with full evolution and partial trace") {
    const ModelParams p = reference_params();
    const SpinProbe probe(p);
    const DensityMatrix rho0 = initial_state(SpinLabel::up, p.nbar, p.n_cut);
    const BlochTrajectory traj = probe.trajectory(TimeGrid::uniform(9.0 * p.tau(), 19));
    for (std::size_t i = 0; i < traj.grid.size(); ++i) {
        const Vec3 v = bloch_vector(partial_trace_env(evolve(probe.bundle(), rho0, traj.grid.times()[i])));
        CHECK((v - traj.vectors1[i]).norm() < 1e-10);
    }
}

TEST_CASE("simulated distance series") {
    const ModelParams p = reference_params();
    const double tau = p.tau();
    const auto [traj, series] = simulate_distance_series(p, TimeGrid::uniform(9.0 * tau, 136));
    CHECK(std::abs(series.D.front() - 1.0) < 1e-12);
    CHECK((traj.vectors1.front() - Vec3(0, 0, 1)).norm() < 1e-12);
    CHECK((traj.vectors2.front() - Vec3(0, 0, -1)).norm() < 1e-12);
    for (std::size_t i = 0; i < series.D.size(); ++i) {
        CHECK(series.D[i] >= -1e-9);
        CHECK(series.D[i] <= 1.0 + 1e-9);
        CHECK(traj.vectors1[i].norm() <= 1.0 + 1e-9);
        CHECK(traj.vectors2[i].norm() <= 1.0 + 1e-9);
        CHECK(series.deltaD[i] == 0.0);
    }
    // a revival: D rises strictly after its first local minimum
    std::size_t first_min = 1;
    while (first_min + 1 < series.D.size() && series.D[first_min + 1] <= series.D[first_min]) ++first_min;
    REQUIRE(first_min + 1 < series.D.size());
    CHECK(series.D[first_min + 1] > series.D[first_min]);

    ModelParams off = p;
    off.Omega = 0.0;
    const auto [traj0, flat] = simulate_distance_series(off, TimeGrid::uniform(9.0 * tau, 136));
    for (double d : flat.D) CHECK(std::abs(d - 1.0) < 1e-12);
}
