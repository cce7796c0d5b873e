#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "lambdasim/jump_space.hpp"
#include "lambdasim/ode.hpp"

namespace lambdasim {

struct NoDetectionError : std::domain_error {
    using std::domain_error::domain_error;
};

/// 99% completion never reached; carries the highest completed population seen.
struct IncompleteRunError : std::runtime_error {
    explicit IncompleteRunError(double achieved)
        : std::runtime_error("completed population never reached 0.99 (max " +
                             std::to_string(achieved) + ")"),
          achieved_max(achieved) {}
    double achieved_max;
};

/// v_HOM = (p_same - p_diff)/(p_same + p_diff). Throws NoDetectionError when
/// both probabilities vanish.
double hom_visibility(double p_same, double p_diff);

/// One full propagation with derived figures of merit.
struct RunResult {
    LambdaParams params;
    std::vector<double> times;  // sampled grid, ps
    std::vector<std::array<double, kProcessLabelCount>> populations;

    double p_same = 0.0;
    double p_diff = 0.0;
    double p_env = 0.0;
    double v_hom = 0.0;
    double efficiency = 0.0;  // p_same + p_diff
    double combined = 0.0;    // v_hom * efficiency
    double t_completion = 0.0;  // t_f: first time completed population >= 0.99
    double rate = 0.0;          // r_f = efficiency / t_f
    bool reached_completion = false;  // 0.99 crossing found
    bool terminated = false;          // incomplete population fell below threshold
    double incomplete = 0.0;          // residual non-sink population at the end
    std::string error;                // empty on a clean run

    double completed_at(std::size_t sample) const {
        const auto& p = populations[sample];
        return p[3] + p[4] + p[5];
    }
};

RunResult run_once(const LambdaParams& params, const OdeControl& control);

/// r_f = e_f / t_f with the 0.99 crossing linearly interpolated on the sampled
/// grid. Throws IncompleteRunError if the run never completed to 0.99.
double production_rate(const RunResult& result);

enum class SweepParameter { H, Omega, Nu };

struct SweepSpec {
    SweepParameter parameter = SweepParameter::Nu;
    std::vector<double> grid;  // strictly increasing
    LambdaParams base;
    bool kappa_tracks_h = true;  // kappa = 3h follows an h sweep

    LambdaParams point(double value) const;
    void validate() const;
};

/// One RunResult per grid value, in grid order. Points run concurrently;
/// per-point failures are recorded in RunResult::error and the sweep continues.
std::vector<RunResult> sweep(const SweepSpec& spec, const OdeControl& control);

struct ThresholdResult {
    LambdaParams params;
    double tuned_value = 0.0;  // h (pulse-relax) or nu (Raman)
    RunResult run;
};

struct ThresholdUnreachable : std::runtime_error {
    ThresholdUnreachable(double f, double lo, double hi)
        : std::runtime_error("target indistinguishability " + std::to_string(f) +
                             " outside the achievable range [" + std::to_string(lo) + ", " +
                             std::to_string(hi) + "]"),
          achievable_lo(lo),
          achievable_hi(hi) {}
    double achievable_lo;
    double achievable_hi;
};

struct ThresholdSearchOptions {
    double v_tolerance = 1e-4;
    // search bracket for the free parameter; 0 picks the mode default
    // (pulse-relax: decreasing-v branch h in [1e-5, 1.4]; Raman: increasing-v
    // branch nu in [12h, 28h] with geometric bracket growth)
    double lo = 0.0;
    double hi = 0.0;
};

/// Tune the free parameter (h for pulse-relax with kappa = 3h, nu for Raman)
/// by bisection on the monotone branch until v_hom matches the target f, and
/// report the production rate there. Throws ThresholdUnreachable with the
/// achievable range when the branch cannot reach f.
ThresholdResult rate_at_indistinguishability(double f, const LambdaParams& base,
                                             const OdeControl& control,
                                             const ThresholdSearchOptions& options = {});

/// Deterministic index-ordered parallel map helper used by sweep and the
/// oracle; exposed for reuse.
void parallel_for_index(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace lambdasim
