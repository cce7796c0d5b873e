#include "lambdasim/ode.hpp"

namespace lambdasim {

void OdeControl::validate() const {
    if (!(rel_tol > 0) || !(abs_tol > 0)) {
        throw std::invalid_argument("OdeControl: tolerances must be positive");
    }
    if (!(max_step > 0) || !(max_step_rel > 0)) {
        throw std::invalid_argument("OdeControl: step caps must be positive");
    }
    if (!(t_max > 0)) {
        throw std::invalid_argument("OdeControl: t_max must be positive");
    }
    if (termination_threshold < 0) {
        throw std::invalid_argument("OdeControl: termination threshold must be non-negative");
    }
}

}  // namespace lambdasim
