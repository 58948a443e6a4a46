#include "qprobe/errors.hpp"

#include <sstream>

namespace qprobe {

namespace {

std::string degenerate_message(double d) {
    std::ostringstream os;
    os << "trace distance " << d << " is at or below the error-propagation floor";
    return os.str();
}

std::string convergence_message(double ref, double refined, double ratio) {
    std::ostringstream os;
    os.precision(10);
    os << "true-value estimate not converged: N(reference)=" << ref << ", N(refined)=" << refined
       << ", relative difference " << ratio;
    return os.str();
}

}  // namespace

DegenerateDistanceError::DegenerateDistanceError(double distance)
    : NumericError(degenerate_message(distance)), distance_(distance) {}

ConvergenceError::ConvergenceError(double n_reference, double n_refined, double ratio)
    : std::runtime_error(convergence_message(n_reference, n_refined, ratio)),
      n_reference_(n_reference),
      n_refined_(n_refined),
      ratio_(ratio) {}

}  // namespace qprobe
