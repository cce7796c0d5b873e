#include "lambdasim/lambda_system.hpp"

#include <cmath>
#include <stdexcept>

namespace lambdasim {

double thermal_beta_ps(double temperature_k) {
    if (!(temperature_k > 0)) {
        throw std::invalid_argument("thermal_beta_ps: temperature must be positive");
    }
    return 1.0 / (constants::kBoltzmannOverHbarPs * temperature_k);
}

LambdaParams LambdaParams::raman(double h, double omega, double nu) {
    LambdaParams p;
    p.h = h;
    p.omega = omega;
    p.nu = nu;
    p.kappa = 3.0 * h;
    p.mode = RunMode::Raman;
    return p;
}

LambdaParams LambdaParams::pulse_relax(double h) {
    LambdaParams p;
    p.h = h;
    p.omega = 0.0;
    p.nu = 0.0;
    p.kappa = 3.0 * h;
    p.mode = RunMode::PulseRelax;
    return p;
}

void LambdaParams::validate() const {
    if (!(h > 0)) throw std::invalid_argument("LambdaParams: h must be positive");
    if (!(kappa > 0)) throw std::invalid_argument("LambdaParams: kappa must be positive");
    if (gamma < 0) throw std::invalid_argument("LambdaParams: gamma must be non-negative");
    if (alpha < 0) throw std::invalid_argument("LambdaParams: alpha must be non-negative");
    if (!(omega_c > 0)) throw std::invalid_argument("LambdaParams: omega_c must be positive");
    if (!(temperature > 0)) {
        throw std::invalid_argument("LambdaParams: temperature must be positive");
    }
    if (mode == RunMode::PulseRelax && (omega != 0.0 || nu != 0.0)) {
        throw std::invalid_argument("LambdaParams: pulse-relax mode requires omega = nu = 0");
    }
}

ComplexMatrix bare_hamiltonian(const LambdaParams& params) {
    ComplexMatrix h = ComplexMatrix::Zero(3, 3);
    h(kE, kE) = params.nu;
    h(kE, kG0) = h(kG0, kE) = params.omega / 2.0;
    h(kE, kGa) = h(kGa, kE) = params.h / 2.0;
    return h;
}

double spectral_density(double omega, double alpha, double omega_c) {
    if (omega < 0) throw std::domain_error("spectral_density: omega must be non-negative");
    const double x = omega / omega_c;
    return alpha * omega * omega * omega * std::exp(-x * x);
}

double bose_occupation(double omega, double temperature_k) {
    if (!(omega > 0)) {
        throw std::domain_error("bose_occupation: omega must be positive (w = 0 is a pole)");
    }
    return 1.0 / std::expm1(thermal_beta_ps(temperature_k) * omega);
}

DressedSystem dressed_system(const LambdaParams& params) {
    DressedSystem d;
    const double h = params.h, omega = params.omega, nu = params.nu;
    const double disc = std::sqrt(nu * nu + omega * omega + h * h);
    d.lambda_plus = (nu + disc) / 2.0;
    d.lambda_minus = (nu - disc) / 2.0;
    d.gap = disc;

    if (disc == 0.0) {
        // fully degenerate corner (all couplings zero): no bright pair, no phonon rates
        d.psi0 = Eigen::Vector3d::Unit(kG0);
        d.psi_plus = Eigen::Vector3d::Unit(kE);
        d.psi_minus = Eigen::Vector3d::Unit(kGa);
        return d;
    }

    // psi0 = n0 (h|g0> - omega|g_a>), no |e> component
    d.psi0 << h, 0.0, -omega;
    d.psi0.normalize();
    // psi+- = n+- (omega|g0> + 2 lambda+- |e> + h|g_a>), n+- > 0
    d.psi_plus << omega, 2.0 * d.lambda_plus, h;
    d.psi_plus.normalize();
    d.psi_minus << omega, 2.0 * d.lambda_minus, h;
    d.psi_minus.normalize();

    d.spectral_j = spectral_density(d.gap, params.alpha, params.omega_c);
    const double beta = thermal_beta_ps(params.temperature);
    // expm1 keeps J*N continuous down to the Lambda -> 0 limit (J N -> alpha Lambda^2 / beta)
    const double em1 = std::expm1(beta * d.gap);
    d.occupation = 1.0 / em1;
    d.rate_down = d.spectral_j * (d.occupation + 1.0);
    d.rate_up = d.spectral_j * d.occupation;
    return d;
}

PhononOperators phonon_operators(const DressedSystem& dressed) {
    PhononOperators ops;
    const Eigen::Vector3cd minus = dressed.psi_minus.cast<Complex>();
    const Eigen::Vector3cd plus = dressed.psi_plus.cast<Complex>();
    ops.down = std::sqrt(dressed.rate_down) * (minus * plus.adjoint());
    ops.up = std::sqrt(dressed.rate_up) * (plus * minus.adjoint());
    return ops;
}

}  // namespace lambdasim
