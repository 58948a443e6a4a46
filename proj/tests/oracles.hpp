// oracles.hpp - Test-only reference implementations, independent of the
// library's eigendecomposition route.

#pragma once

#include "qprobe/hilbert.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace qprobe::oracle {

// Fixed-step classical RK4 for i dψ/dt = H ψ. `observe(t, ψ)` is called at
// t = 0 and after every step.
inline void rk4_schrodinger(const ComplexMatrix& h, Eigen::VectorXcd psi, double t_end, std::size_t steps,
                            const std::function<void(double, const Eigen::VectorXcd&)>& observe) {
    const cplx minus_i{0.0, -1.0};
    const double dt = t_end / static_cast<double>(steps);
    auto f = [&](const Eigen::VectorXcd& y) -> Eigen::VectorXcd { return minus_i * (h * y); };
    observe(0.0, psi);
    for (std::size_t s = 0; s < steps; ++s) {
        const Eigen::VectorXcd k1 = f(psi);
        const Eigen::VectorXcd k2 = f(psi + 0.5 * dt * k1);
        const Eigen::VectorXcd k3 = f(psi + 0.5 * dt * k2);
        const Eigen::VectorXcd k4 = f(psi + dt * k3);
        psi += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        observe(static_cast<double>(s + 1) * dt, psi);
    }
}

// One step of the von Neumann equation as a truncated Taylor series of
// exp(−iHh) of the given order, applied as ρ ← S ρ S†.
class TaylorStepper {
public:
    TaylorStepper(const ComplexMatrix& h, double step, int order) {
        const Eigen::Index n = h.rows();
        const ComplexMatrix a = cplx{0.0, -step} * h;
        step_ = ComplexMatrix::Identity(n, n);
        ComplexMatrix term = ComplexMatrix::Identity(n, n);
        for (int k = 1; k <= order; ++k) {
            term = (term * a) / static_cast<double>(k);
            step_ += term;
        }
    }

    ComplexMatrix advance(const ComplexMatrix& rho) const { return step_ * rho * step_.adjoint(); }

private:
    ComplexMatrix step_;
};

// Largest step with ‖H‖_F·h ≤ scale.
inline double taylor_step(const ComplexMatrix& h, double scale) { return scale / h.norm(); }

}  // namespace qprobe::oracle
