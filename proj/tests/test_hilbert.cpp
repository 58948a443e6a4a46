#include "qprobe/errors.hpp"
#include "qprobe/hilbert.hpp"

#include <doctest.h>

#include <cmath>

using namespace qprobe;

namespace {

ModelParams reference_params() {
    ModelParams p;
    p.omega_E = kTwoPi * 1.92e6;
    p.omega_z = p.omega_E;
    p.Omega = kTwoPi * 100e3;
    p.eta = 0.32;
    p.nbar = 1.0;
    return p;
}

}  // namespace

TEST_CASE("thermal populations: ground state and geometric series") {
    const auto ground = thermal_populations(0.0, 5);
    CHECK(ground.p[0] == 1.0);
    for (std::size_t n = 1; n < ground.p.size(); ++n) CHECK(ground.p[n] == 0.0);

    const auto one = thermal_populations(1.0, 10);
    for (std::size_t n = 0; n < one.p.size(); ++n)
        CHECK(one.p[n] == doctest::Approx(std::ldexp(1.0, -static_cast<int>(n + 1))).epsilon(1e-15));
    CHECK(one.p[0] == 0.5);
    CHECK(one.p[1] == 0.25);
    CHECK(one.p[2] == 0.125);
}

TEST_CASE("thermal populations: truncation deficit is reported, not absorbed") {
    const auto t = thermal_populations(1.4, 20);
    const double closed = 1.0 - std::pow(1.4 / 2.4, 21);
    CHECK(std::abs(t.included_mass - closed) < 1e-12);
    CHECK(std::abs(t.included_mass - 0.9999879) < 1e-6);
    CHECK(std::abs(thermal_included_mass(1.4, 20) - closed) < 1e-15);

    for (double nbar : {0.0, 0.09, 0.5, 1.0, 1.4, 3.0})
        for (int n_cut : {1, 2, 7, 20})
            CHECK(std::abs(thermal_populations(nbar, n_cut).included_mass - thermal_included_mass(nbar, n_cut)) < 1e-12);

    CHECK_THROWS_AS(thermal_populations(-0.1, 20), ParameterError);
    CHECK_THROWS_AS(thermal_populations(1.0, 0), ParameterError);
}

TEST_CASE("operators: number operator, spin raising, truncated commutator") {
    const Operators ops = build_operators(2, 0);
    const ComplexMatrix n = ops.a_dag * ops.a;
    CHECK(max_abs(n - ComplexMatrix(Eigen::Vector3cd(0, 1, 2).asDiagonal())) < 1e-15);

    const Eigen::Vector2cd up(1, 0), down(0, 1);
    CHECK((ops.sigma_plus * down - up).norm() == 0.0);
    CHECK((ops.sigma_plus * up).norm() == 0.0);
    CHECK((ops.sigma_z * up - up).norm() == 0.0);

    const Operators big = build_operators(6, 0);
    const ComplexMatrix comm = big.a * big.a_dag - big.a_dag * big.a;
    const ComplexMatrix id = ComplexMatrix::Identity(7, 7);
    CHECK(max_abs((comm - id).topLeftCorner(6, 6)) < 1e-14);
    // the truncation artifact lives entirely in the last diagonal entry
    CHECK(comm(6, 6).real() == doctest::Approx(-6.0));
    CHECK(max_abs((comm - id).topRightCorner(6, 1)) < 1e-14);
}

TEST_CASE("operators: composite identities hold exactly") {
    const Operators ops = build_operators(4, 3);
    const ComplexMatrix sz = ops.spin_op(ops.sigma_z);
    const ComplexMatrix n = ops.boson_op(ops.number);
    CHECK((sz * n - n * sz).cwiseAbs().maxCoeff() == 0.0);
    CHECK(ops.position_padded.rows() == 8);
}

TEST_CASE("displacement: identity at eta = 0 and coherent-state overlap") {
    const Displacement id = build_displacement(0.0, 8, 10);
    CHECK(max_abs(id.matrix - ComplexMatrix::Identity(9, 9)) < 1e-13);

    const Displacement d = build_displacement(0.32, 20, 10);
    CHECK(std::abs(d.matrix(0, 0) - std::exp(-0.32 * 0.32 / 2.0)) < 1e-12);
    CHECK(std::abs(d.matrix(0, 0) - 0.9500886) < 1e-7);

    // projected block norms stay within the unitary bound
    for (Eigen::Index k = 0; k < d.matrix.rows(); ++k) {
        CHECK(d.matrix.row(k).norm() <= 1.0 + 1e-8);
        CHECK(d.matrix.col(k).norm() <= 1.0 + 1e-8);
    }
    CHECK(d.unitarity_defect < 1.0);
    CHECK_THROWS_AS(build_displacement(-0.1, 20, 10), ParameterError);
}

TEST_CASE("displacement: insensitive to the padding depth on low levels") {
    const int n_cut = 20;
    const Displacement a = build_displacement(0.32, n_cut, 10);
    const Displacement b = build_displacement(0.32, n_cut, 20);
    const int kept = n_cut - 5;
    CHECK(max_abs(a.matrix.topLeftCorner(kept, kept) - b.matrix.topLeftCorner(kept, kept)) < 1e-8);
}

TEST_CASE("hamiltonian: structure in limiting cases") {
    ModelParams p = reference_params();
    const ComplexMatrix h = build_hamiltonian(p);
    CHECK(h.rows() == 42);
    CHECK(max_abs(h - h.adjoint()) < 1e-12);

    const Operators ops = build_operators(p.n_cut, p.n_pad);
    const ComplexMatrix sz = ops.spin_op(ops.sigma_z);

    ModelParams free = p;
    free.Omega = 0.0;
    const ComplexMatrix h0 = build_hamiltonian(free);
    CHECK(max_abs(h0 * sz - sz * h0) == 0.0);

    ModelParams carrier = p;
    carrier.eta = 0.0;
    const ComplexMatrix hc = build_hamiltonian(carrier);
    const ComplexMatrix expected_coupling = 0.5 * p.Omega * ops.spin_op(ops.sigma_x);
    CHECK(max_abs(hc - h0 - expected_coupling) < 1e-12 * max_abs(hc));
}

TEST_CASE("hamiltonian: parameter validation") {
    ModelParams p = reference_params();
    p.omega_E = 0.0;
    CHECK_THROWS_AS(build_hamiltonian(p), ParameterError);
    p = reference_params();
    p.eta = -1.0;
    CHECK_THROWS_AS(build_hamiltonian(p), ParameterError);
    p = reference_params();
    p.n_cut = 0;
    CHECK_THROWS_AS(build_hamiltonian(p), ParameterError);
    p = reference_params();
    p.Omega = 0.0;
    CHECK_THROWS_AS(p.tau(), ParameterError);
    CHECK(reference_params().tau() == doctest::Approx(1e-5));
}

TEST_CASE("initial states: product with renormalized thermal mode") {
    const DensityMatrix pure = initial_state(SpinLabel::up, 0.0, 5);
    CHECK(pure.matrix()(0, 0) == cplx(1.0, 0.0));
    CHECK(pure.purity() == doctest::Approx(1.0));

    const DensityMatrix hot = initial_state(SpinLabel::down, 1.4, 20);
    CHECK(std::abs(hot.matrix().trace() - cplx(1.0, 0.0)) < 1e-12);
    CHECK(hot.matrix().topLeftCorner(21, 21).cwiseAbs().maxCoeff() == 0.0);

    const DensityMatrix one = initial_state(SpinLabel::down, 1.0, 20);
    CHECK(std::abs(one.purity() - 1.0 / 3.0) < 1e-6);
}

TEST_CASE("density matrix validation") {
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(0, 0) = 0.7;
    CHECK_THROWS_AS(DensityMatrix(m, StateSpace::spin), ParameterError);  // trace
    m(1, 1) = 0.3;
    m(0, 1) = 0.1;
    CHECK_THROWS_AS(DensityMatrix(m, StateSpace::spin), ParameterError);  // not Hermitian
    m(1, 0) = 0.1;
    CHECK_NOTHROW(DensityMatrix(m, StateSpace::spin));
    ComplexMatrix neg = ComplexMatrix::Zero(2, 2);
    neg(0, 0) = 1.5;
    neg(1, 1) = -0.5;
    CHECK_THROWS_AS(DensityMatrix(neg, StateSpace::spin), ParameterError);
}
