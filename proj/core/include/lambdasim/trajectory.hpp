#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "lambdasim/lambda_system.hpp"
#include "lambdasim/matrix.hpp"

namespace lambdasim {

struct JumpEvent {
    double time = 0.0;  // absolute, ps
    int channel = -1;
};

struct Trajectory {
    std::uint64_t seed = 0;
    std::uint64_t index = 0;
    std::vector<JumpEvent> events;   // strictly increasing times
    bool timed_out = false;          // t_max hit before the stop condition
    double max_norm_defect = 0.0;    // worst ||psi|| - 1 right after a jump renormalization
};

/// Monte Carlo wave-function sampler for a constant effective Hamiltonian.
/// No-jump evolution under H_eff = H - (i/2) sum_k rate_k L_k^dag L_k is
/// evaluated exactly through a one-time eigendecomposition; jump times come
/// from norm-threshold waiting-time sampling (draw u, solve ||psi(t)||^2 = u),
/// and the channel is picked proportional to rate_k ||L_k psi||^2. Falls back
/// to adaptive integration if H_eff resists diagonalization.
class McwfEngine {
  public:
    struct Channel {
        ComplexMatrix op;
        double rate = 0.0;
        bool terminal = false;  // trajectory ends on this jump; op never applied
    };

    McwfEngine(const ComplexMatrix& hamiltonian, std::vector<Channel> channels, double t_max);

    /// One trajectory. The RNG stream is mt19937_64 seeded from
    /// seed_seq{seed, index}, so (seed, index) fully determines the result.
    /// `stop` is consulted after each recorded event.
    Trajectory run(std::uint64_t seed, std::uint64_t index, const ComplexVector& psi0,
                   const std::function<bool(const std::vector<JumpEvent>&)>& stop) const;

    /// Unnormalized no-jump evolution, exposed for invariant checks.
    ComplexVector evolve(const ComplexVector& psi, double dt) const;
    /// sum_k rate_k ||L_k psi||^2 (equals -d||psi||^2/dt under no-jump evolution).
    double norm_loss_rate(const ComplexVector& psi) const;

    bool analytic() const { return analytic_; }
    double t_max() const { return t_max_; }

  private:
    std::vector<Channel> channels_;
    ComplexMatrix h_eff_;
    double t_max_;
    bool analytic_ = false;
    ComplexVector eigenvalues_;  // of -i H_eff
    ComplexMatrix basis_, basis_inv_;

    double find_jump_time(const ComplexVector& psi, double window, double threshold) const;
};

struct TrajectoryStats {
    long n = 0;
    long n_same = 0;
    long n_diff = 0;
    long n_env = 0;
    long n_incomplete = 0;
    double p_same = 0.0, p_diff = 0.0, p_env = 0.0, p_incomplete = 0.0;
    double se_same = 0.0, se_diff = 0.0, se_env = 0.0;  // binomial standard errors
};

/// Quantum-jump estimate of the two-source HOM statistics on the bare
/// two-copy system (no process states): n independent seeded trajectories,
/// classified same/different-arm on the second detection or env on the first
/// spontaneous emission. Reproducible from (params, n, seed); trajectories
/// run concurrently and aggregate by count.
TrajectoryStats sample_trajectories(const LambdaParams& params, long n, std::uint64_t seed,
                                    double t_max = 4e5);

/// Channel tags of the pair sampler, in channel order.
enum class PairChannel { DetectPlus = 0, DetectMinus = 1, Spont1 = 2, Spont2 = 3,
                         PhononDown1 = 4, PhononUp1 = 5, PhononDown2 = 6, PhononUp2 = 7 };

/// The sampler's engine for one parameter set (exposed for tests).
McwfEngine make_pair_engine(const LambdaParams& params, double t_max);
ComplexVector pair_initial_ket(const LambdaParams& params);

}  // namespace lambdasim
