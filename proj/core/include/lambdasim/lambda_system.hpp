#pragma once

#include <Eigen/Dense>

#include "lambdasim/matrix.hpp"

namespace lambdasim {

namespace constants {
// k_B / hbar in ps^-1 per kelvin (CODATA: k_B = 1.380649e-23 J/K,
// hbar = 1.054571817e-34 J s). Thermal frequency at 298 K: 39.0143 ps^-1.
inline constexpr double kBoltzmannOverHbarPs = 1.380649e-23 / 1.054571817e-34 * 1e-12;
}  // namespace constants

/// beta = hbar/(k_B T) in ps, so beta * omega is dimensionless for omega in ps^-1.
double thermal_beta_ps(double temperature_k);

enum class RunMode { Raman, PulseRelax };

/// Bare-basis indices of the single-source Lambda system {g0, e, g_a}.
inline constexpr int kG0 = 0;
inline constexpr int kE = 1;
inline constexpr int kGa = 2;

/// All physical constants of one source. Frequencies/rates in ps^-1 (hbar = 1),
/// temperature in kelvin.
struct LambdaParams {
    double h = 0.5;            // dipole-cavity coupling
    double omega = 0.0;        // classical drive amplitude
    double nu = 0.0;           // shared detuning
    double kappa = 1.5;        // cavity leakage rate (default 3h)
    double gamma = 0.05;       // spontaneous-emission rate (radiative lifetime 200 ps)
    double alpha = 0.0027;     // phonon coupling strength in J(w) = alpha w^3 exp(-(w/w_c)^2)
    double omega_c = 2.2;      // phonon cutoff
    double temperature = 298.0;
    RunMode mode = RunMode::Raman;

    static LambdaParams raman(double h, double omega, double nu);
    static LambdaParams pulse_relax(double h);

    /// Throws std::invalid_argument on violated invariants (h, kappa, omega_c,
    /// T > 0; gamma, alpha >= 0; pulse-relax requires omega = nu = 0).
    void validate() const;
};

/// H = nu|e><e| + (h/2)(|g_a><e| + h.c.) + (omega/2)(|e><g0| + h.c.)
/// on the bare basis {g0, e, g_a}.
ComplexMatrix bare_hamiltonian(const LambdaParams& params);

/// Super-Ohmic deformation-potential spectral density J(w) = alpha w^3 exp(-(w/w_c)^2).
/// Rejects negative w; J(0) = 0, single maximum at w_c sqrt(3/2).
double spectral_density(double omega, double alpha, double omega_c);

/// Bose occupation N(w) = 1/(exp(beta w) - 1). w = 0 is a pole: callers needing
/// the degenerate limit must use the combined J*N rates of dressed_system.
double bose_occupation(double omega, double temperature_k);

/// Eigensystem of the driven Lambda Hamiltonian plus the phonon rates at the
/// bright-state gap. Eigenvectors are real in this model; phases fixed so the
/// |g0> amplitude (for psi0: the h coefficient) is non-negative.
struct DressedSystem {
    double lambda0 = 0.0;  // dark-state eigenvalue, exactly 0
    double lambda_plus = 0.0;
    double lambda_minus = 0.0;
    Eigen::Vector3d psi0 = Eigen::Vector3d::Zero();
    Eigen::Vector3d psi_plus = Eigen::Vector3d::Zero();
    Eigen::Vector3d psi_minus = Eigen::Vector3d::Zero();
    double gap = 0.0;         // Lambda = lambda_plus - lambda_minus
    double spectral_j = 0.0;  // J(Lambda)
    double occupation = 0.0;  // N(Lambda)
    double rate_down = 0.0;   // J (N + 1), psi+ -> psi-
    double rate_up = 0.0;     // J N, psi- -> psi+
};

DressedSystem dressed_system(const LambdaParams& params);

/// Phonon decoherence operators with the rates absorbed (unit Lindblad rate):
/// down = sqrt(J(N+1)) |psi-><psi+|, up = sqrt(JN) |psi+><psi-|. Both
/// annihilate the dark state psi0. 3x3 on the bare basis.
struct PhononOperators {
    ComplexMatrix down;
    ComplexMatrix up;
};

PhononOperators phonon_operators(const DressedSystem& dressed);

}  // namespace lambdasim
