#include "qprobe/hilbert.hpp"

#include "qprobe/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cassert>
#include <cmath>
#include <string>

namespace qprobe {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ParameterError(what);
}

ComplexMatrix annihilation(int levels) {
    ComplexMatrix a = ComplexMatrix::Zero(levels, levels);
    for (int n = 1; n < levels; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

}  // namespace

void ModelParams::validate() const {
    require(std::isfinite(omega_z), "omega_z must be finite");
    require(std::isfinite(omega_E) && omega_E > 0.0, "omega_E must be positive");
    require(std::isfinite(Omega) && Omega >= 0.0, "Omega must be non-negative");
    require(std::isfinite(eta) && eta >= 0.0, "eta must be non-negative");
    require(std::isfinite(nbar) && nbar >= 0.0, "nbar must be non-negative");
    require(n_cut >= 1, "n_cut must be at least 1");
    require(n_pad >= 0, "n_pad must be non-negative");
}

double ModelParams::tau() const {
    require(Omega > 0.0, "tau is undefined for Omega = 0");
    return kTwoPi / Omega;
}

ThermalPopulations thermal_populations(double nbar, int n_cut) {
    require(std::isfinite(nbar) && nbar >= 0.0, "nbar must be non-negative");
    require(n_cut >= 1, "n_cut must be at least 1");
    ThermalPopulations out;
    out.p.resize(static_cast<std::size_t>(n_cut) + 1);
    // p_n = (1/(1+nbar)) · q^n with q = nbar/(1+nbar)
    const double q = nbar / (1.0 + nbar);
    double pn = 1.0 / (1.0 + nbar);
    for (auto& p : out.p) {
        p = pn;
        out.included_mass += pn;
        pn *= q;
    }
    return out;
}

double thermal_included_mass(double nbar, int n_cut) {
    require(std::isfinite(nbar) && nbar >= 0.0, "nbar must be non-negative");
    return 1.0 - std::pow(nbar / (1.0 + nbar), n_cut + 1);
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

ComplexMatrix Operators::spin_op(const ComplexMatrix& s) const { return kron(s, id_boson); }
ComplexMatrix Operators::boson_op(const ComplexMatrix& b) const { return kron(id_spin, b); }

Operators build_operators(int n_cut, int n_pad) {
    require(n_cut >= 1, "n_cut must be at least 1");
    require(n_pad >= 0, "n_pad must be non-negative");
    const cplx i{0.0, 1.0};
    Operators ops;
    ops.n_cut = n_cut;
    ops.n_pad = n_pad;
    ops.a = annihilation(n_cut + 1);
    ops.a_dag = ops.a.adjoint();
    ops.number = ops.a_dag * ops.a;
    ops.sigma_x = ComplexMatrix::Zero(2, 2);
    ops.sigma_x(0, 1) = ops.sigma_x(1, 0) = 1.0;
    ops.sigma_y = ComplexMatrix::Zero(2, 2);
    ops.sigma_y(0, 1) = -i;
    ops.sigma_y(1, 0) = i;
    ops.sigma_z = ComplexMatrix::Zero(2, 2);
    ops.sigma_z(0, 0) = 1.0;
    ops.sigma_z(1, 1) = -1.0;
    ops.sigma_plus = 0.5 * (ops.sigma_x + i * ops.sigma_y);
    ops.sigma_minus = 0.5 * (ops.sigma_x - i * ops.sigma_y);
    ops.id_spin = ComplexMatrix::Identity(2, 2);
    ops.id_boson = ComplexMatrix::Identity(n_cut + 1, n_cut + 1);
    const ComplexMatrix ap = annihilation(n_cut + n_pad + 1);
    ops.position_padded = ap + ap.adjoint();
    return ops;
}

Displacement build_displacement(double eta, int n_cut, int n_pad) {
    require(std::isfinite(eta) && eta >= 0.0, "eta must be non-negative");
    require(n_cut >= 1, "n_cut must be at least 1");
    require(n_pad >= 0, "n_pad must be non-negative");
    const int kept = n_cut + 1;
    const int padded = n_cut + n_pad + 1;

    // a + a† is real symmetric tridiagonal
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(padded, padded);
    for (int n = 1; n < padded; ++n) x(n - 1, n) = x(n, n - 1) = std::sqrt(static_cast<double>(n));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x);
    if (es.info() != Eigen::Success) throw NumericError("eigendecomposition of a + a† failed");

    const Eigen::MatrixXcd v = es.eigenvectors().cast<cplx>();
    Eigen::VectorXcd phases(padded);
    for (int k = 0; k < padded; ++k) phases(k) = std::polar(1.0, eta * es.eigenvalues()(k));
    const ComplexMatrix full = v * phases.asDiagonal() * v.adjoint();

    Displacement out;
    out.matrix = full.topLeftCorner(kept, kept);
    out.unitarity_defect =
        max_abs(out.matrix.adjoint() * out.matrix - ComplexMatrix::Identity(kept, kept));
    return out;
}

ComplexMatrix build_hamiltonian(const ModelParams& params) {
    params.validate();
    const Operators ops = build_operators(params.n_cut, params.n_pad);
    const Displacement disp = build_displacement(params.eta, params.n_cut, params.n_pad);

    const ComplexMatrix coupling = kron(ops.sigma_plus, disp.matrix);
    ComplexMatrix h = 0.5 * params.omega_z * ops.spin_op(ops.sigma_z) +
                      params.omega_E * ops.boson_op(ops.number) +
                      0.5 * params.Omega * (coupling + coupling.adjoint());
    assert(h.rows() == static_cast<Eigen::Index>(params.total_dim()));
    // remove rounding asymmetry so the Hermitian tag holds exactly
    return 0.5 * (h + h.adjoint());
}

double max_abs(const ComplexMatrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

DensityMatrix::DensityMatrix(ComplexMatrix m, StateSpace space, const DensityTolerances& tol)
    : m_(std::move(m)), space_(space) {
    require(m_.rows() == m_.cols() && m_.rows() > 0, "density matrix must be square and non-empty");
    require(m_.allFinite(), "density matrix has non-finite entries");
    require(std::abs(m_.trace() - cplx{1.0, 0.0}) <= tol.trace, "density matrix trace differs from 1");
    require(max_abs(m_ - m_.adjoint()) <= tol.hermitian, "density matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m_, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("density matrix eigenvalue check failed");
    require(es.eigenvalues().minCoeff() >= tol.min_eigenvalue, "density matrix has a negative eigenvalue");
}

double DensityMatrix::purity() const { return (m_ * m_).trace().real(); }

DensityMatrix initial_state(SpinLabel spin, double nbar, int n_cut) {
    const ThermalPopulations thermal = thermal_populations(nbar, n_cut);
    const auto levels = static_cast<Eigen::Index>(thermal.p.size());
    ComplexMatrix rho = ComplexMatrix::Zero(2 * levels, 2 * levels);
    const Eigen::Index offset = spin == SpinLabel::up ? 0 : levels;
    for (Eigen::Index n = 0; n < levels; ++n)
        rho(offset + n, offset + n) = thermal.p[static_cast<std::size_t>(n)] / thermal.included_mass;
    return DensityMatrix(std::move(rho), StateSpace::total);
}

}  // namespace qprobe
