// hilbert.hpp - Truncated spin ⊗ boson Hilbert space, operators and Hamiltonian
//
// Basis ordering is spin ⊗ boson with |↑⟩ first, i.e. the composite index of
// |s, n⟩ is s·(n_cut+1) + n with s = 0 for ↑ and s = 1 for ↓. Units: ħ = 1,
// every frequency is angular (rad/s), every time is in seconds.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <vector>

namespace qprobe {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

struct ModelParams {
    double omega_z{0.0};  // spin splitting
    double omega_E{0.0};  // boson mode frequency
    double Omega{0.0};    // spin coupling rate
    double eta{0.0};      // spin-boson coupling parameter
    double nbar{0.0};     // initial thermal occupation
    int n_cut{20};        // Fock cutoff: levels 0..n_cut are kept
    int n_pad{10};        // extra levels used only to build the displacement operator

    // Throws ParameterError unless Omega ≥ 0, omega_E > 0, eta ≥ 0, nbar ≥ 0,
    // n_cut ≥ 1 and n_pad ≥ 0 (all finite).
    void validate() const;

    // Interaction period 2π/Ω, the natural time unit. Throws ParameterError
    // for a decoupled model (Ω = 0).
    double tau() const;

    std::size_t boson_dim() const { return static_cast<std::size_t>(n_cut) + 1; }
    std::size_t total_dim() const { return 2 * boson_dim(); }
};

// Thermal occupation probabilities p_n = nbar^n / (1+nbar)^(n+1), n = 0..n_cut.
// Not renormalized; included_mass is Σ p_n so the truncation deficit stays visible.
struct ThermalPopulations {
    std::vector<double> p;
    double included_mass{0.0};
};

ThermalPopulations thermal_populations(double nbar, int n_cut);

// Closed form 1 − (nbar/(1+nbar))^(n_cut+1) of the included mass.
double thermal_included_mass(double nbar, int n_cut);

struct Operators {
    int n_cut{0};
    int n_pad{0};
    ComplexMatrix a;       // a[n-1, n] = √n on levels 0..n_cut
    ComplexMatrix a_dag;
    ComplexMatrix number;  // a†a
    ComplexMatrix sigma_x;
    ComplexMatrix sigma_y;
    ComplexMatrix sigma_z;
    ComplexMatrix sigma_plus;   // |↑⟩⟨↓|
    ComplexMatrix sigma_minus;  // |↓⟩⟨↑|
    ComplexMatrix id_spin;
    ComplexMatrix id_boson;
    ComplexMatrix position_padded;  // a + a† on levels 0..n_cut+n_pad

    // Lift single-factor operators onto the composite space.
    ComplexMatrix spin_op(const ComplexMatrix& s) const;
    ComplexMatrix boson_op(const ComplexMatrix& b) const;
};

Operators build_operators(int n_cut, int n_pad);

// Kronecker product a ⊗ b.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

struct Displacement {
    ComplexMatrix matrix;         // (n_cut+1)² block of exp(iη(a+a†)) on the padded space
    double unitarity_defect{0.0};  // max |P†P − I| of the projected block
};

// exp(iη(a + a†)), evaluated on the padded space by eigendecomposition and then
// projected onto the kept levels.
Displacement build_displacement(double eta, int n_cut, int n_pad);

// H = (ω_z/2) σ_z ⊗ I + ω_E I ⊗ a†a + (Ω/2)(σ+ ⊗ e^{iη(a+a†)} + h.c.)
ComplexMatrix build_hamiltonian(const ModelParams& params);

enum class StateSpace { total, spin, boson };
enum class SpinLabel { up, down };

struct DensityTolerances {
    double trace{1e-10};
    double hermitian{1e-12};
    double min_eigenvalue{-1e-10};
};

// A validated density matrix. Construction throws ParameterError when the
// trace, Hermiticity or positivity checks fail.
class DensityMatrix {
public:
    DensityMatrix(ComplexMatrix m, StateSpace space, const DensityTolerances& tol = {});

    const ComplexMatrix& matrix() const noexcept { return m_; }
    StateSpace space() const noexcept { return space_; }
    Eigen::Index dim() const noexcept { return m_.rows(); }
    double purity() const;

private:
    ComplexMatrix m_;
    StateSpace space_;
};

// ρ_S ⊗ diag(p_0..p_{n_cut}) renormalized to unit trace.
DensityMatrix initial_state(SpinLabel spin, double nbar, int n_cut);

// Largest absolute entry, the norm used for all matrix tolerances here.
double max_abs(const ComplexMatrix& m);

}  // namespace qprobe
