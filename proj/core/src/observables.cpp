#include "lambdasim/observables.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace lambdasim {

double hom_visibility(double p_same, double p_diff) {
    if (p_same < 0 || p_diff < 0) {
        throw std::invalid_argument("hom_visibility: negative probability");
    }
    const double total = p_same + p_diff;
    if (total <= 0.0) {
        throw NoDetectionError("hom_visibility: no detection events recorded");
    }
    return (p_same - p_diff) / total;
}

namespace {

// first crossing of completed(t) >= level, linearly interpolated
double interpolate_crossing(const RunResult& result, double level) {
    for (std::size_t i = 1; i < result.times.size(); ++i) {
        const double c0 = result.completed_at(i - 1);
        const double c1 = result.completed_at(i);
        if (c1 >= level) {
            if (c1 == c0) return result.times[i];
            const double frac = (level - c0) / (c1 - c0);
            return result.times[i - 1] + frac * (result.times[i] - result.times[i - 1]);
        }
    }
    throw IncompleteRunError(result.times.empty() ? 0.0
                                                  : result.completed_at(result.times.size() - 1));
}

}  // namespace

double production_rate(const RunResult& result) {
    const double t_f = interpolate_crossing(result, 0.99);
    return result.efficiency / t_f;
}

RunResult run_once(const LambdaParams& params, const OdeControl& control) {
    params.validate();
    RunResult result;
    result.params = params;

    PairSystem system = build_extended_space(params);
    const auto& gen = system.generator;
    BlockDensityMatrix rho = system.initial;

    double next_sample = 0.0;
    auto observer = [&](double t, const ComplexVector& flat) {
        if (t < next_sample) return;
        // 1% relative grid keeps the linear t_f interpolation well under 0.5%
        next_sample = t * 1.01 + 1e-9;
        std::array<double, kProcessLabelCount> pops{};
        for (int b = 0; b < kProcessLabelCount; ++b) pops[b] = gen.block_population(flat, b);
        result.times.push_back(t);
        result.populations.push_back(pops);
    };

    const IntegrationReport report = propagate(rho, gen, control, observer);
    result.terminated = report.terminated;

    // final state, recorded unconditionally
    {
        std::array<double, kProcessLabelCount> pops{};
        for (int b = 0; b < kProcessLabelCount; ++b) {
            pops[b] = gen.block_population(rho.flat(), b);
        }
        if (result.times.empty() || result.times.back() != report.t_end) {
            result.times.push_back(report.t_end);
            result.populations.push_back(pops);
        }
        // perfect-interference runs leave sink populations at -O(eps)
        auto clamp_noise = [](double p) { return p < 0.0 && p > -1e-10 ? 0.0 : p; };
        result.p_same = clamp_noise(pops[static_cast<int>(ProcessLabel::Same)]);
        result.p_diff = clamp_noise(pops[static_cast<int>(ProcessLabel::Diff)]);
        result.p_env = clamp_noise(pops[static_cast<int>(ProcessLabel::Env)]);
        result.incomplete = 1.0 - (result.p_same + result.p_diff + result.p_env);
    }

    result.efficiency = result.p_same + result.p_diff;
    if (result.efficiency > 0.0) {
        result.v_hom = hom_visibility(result.p_same, result.p_diff);
        result.combined = result.v_hom * result.efficiency;
    } else {
        result.v_hom = std::numeric_limits<double>::quiet_NaN();
        result.combined = 0.0;
        result.error = "no detection events";
    }

    try {
        result.t_completion = interpolate_crossing(result, 0.99);
        result.rate = result.efficiency / result.t_completion;
        result.reached_completion = true;
    } catch (const IncompleteRunError& e) {
        result.t_completion = std::numeric_limits<double>::quiet_NaN();
        result.rate = std::numeric_limits<double>::quiet_NaN();
        result.reached_completion = false;
        if (result.error.empty()) result.error = e.what();
    }
    if (!report.terminated && result.error.empty()) {
        result.error = "t_max reached before the termination threshold";
    }
    return result;
}

LambdaParams SweepSpec::point(double value) const {
    LambdaParams p = base;
    switch (parameter) {
        case SweepParameter::H:
            p.h = value;
            if (kappa_tracks_h) p.kappa = 3.0 * value;
            break;
        case SweepParameter::Omega:
            p.omega = value;
            break;
        case SweepParameter::Nu:
            p.nu = value;
            break;
    }
    return p;
}

void SweepSpec::validate() const {
    if (grid.empty()) throw std::invalid_argument("SweepSpec: empty grid");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw std::invalid_argument("SweepSpec: grid must be strictly increasing");
        }
    }
    if (base.mode == RunMode::PulseRelax && parameter != SweepParameter::H) {
        throw std::invalid_argument("SweepSpec: pulse-relax only sweeps h");
    }
}

void parallel_for_index(std::size_t count, const std::function<void(std::size_t)>& body) {
    const std::size_t workers =
        std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                body(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

std::vector<RunResult> sweep(const SweepSpec& spec, const OdeControl& control) {
    spec.validate();
    std::vector<RunResult> results(spec.grid.size());
    parallel_for_index(spec.grid.size(), [&](std::size_t i) {
        const LambdaParams p = spec.point(spec.grid[i]);
        try {
            results[i] = run_once(p, control);
        } catch (const std::exception& e) {
            results[i].params = p;
            results[i].error = e.what();
        }
    });
    return results;
}

namespace {

struct SearchEvaluation {
    RunResult run;
    double v = 0.0;
};

// Run with a termination threshold tight enough that the undistributed
// remainder cannot bias v_hom at the requested tolerance, growing t_max when
// the horizon turns out too short. The remainder must stay small against the
// *detected* population, which can sit orders of magnitude below 1 when
// spontaneous emission dominates.
SearchEvaluation evaluate_point(const LambdaParams& params, const OdeControl& base_control,
                                double tol_v) {
    OdeControl control = base_control;
    control.termination_threshold =
        std::min(control.termination_threshold, std::clamp(tol_v / 2.0, 1e-7, 1e-4));
    // the absolute error floor likewise sits far below any detected population
    control.abs_tol = std::min(control.abs_tol, 1e-13);
    for (int attempt = 0; attempt < 6; ++attempt) {
        SearchEvaluation eval;
        eval.run = run_once(params, control);
        if (!eval.run.terminated || !eval.run.reached_completion) {
            control.t_max *= 4.0;
            continue;
        }
        const double needed =
            std::max(0.25 * tol_v * std::max(eval.run.efficiency, 1e-12), 1e-12);
        if (eval.run.incomplete > needed) {
            control.termination_threshold = 0.5 * needed;
            continue;
        }
        eval.v = eval.run.v_hom;
        return eval;
    }
    throw std::runtime_error("rate_at_indistinguishability: propagation did not terminate");
}

}  // namespace

ThresholdResult rate_at_indistinguishability(double f, const LambdaParams& base,
                                             const OdeControl& control,
                                             const ThresholdSearchOptions& options) {
    if (!(f > 0.0 && f < 1.0)) {
        throw std::invalid_argument("rate_at_indistinguishability: f must be in (0, 1)");
    }
    base.validate();
    const bool raman = base.mode == RunMode::Raman;

    auto with_value = [&](double value) {
        LambdaParams p = base;
        if (raman) {
            p.nu = value;
        } else {
            p.h = value;
            p.kappa = 3.0 * value;
        }
        return p;
    };

    // two-phase tolerances: bracket coarsely, polish at full precision
    OdeControl coarse = control;
    coarse.rel_tol = std::max(control.rel_tol, 1e-6);
    coarse.abs_tol = std::max(control.abs_tol, 1e-9);
    const double tol_v =
        std::min(options.v_tolerance, std::max(0.05 * (1.0 - f), 1e-7));

    double lo = options.lo;
    double hi = options.hi;
    if (lo <= 0.0) lo = raman ? 12.0 * base.h : 1e-4;
    if (hi <= 0.0) hi = raman ? 28.0 * base.h : 1.4;

    // v increases with nu on the Raman branch and decreases with h on the
    // pulse-relax branch; orient the bisection by the sign.
    const double sign = raman ? 1.0 : -1.0;
    auto eval_coarse = [&](double value) {
        return evaluate_point(with_value(value), coarse, tol_v).v;
    };

    double v_lo = eval_coarse(lo);
    double v_hi;
    if (raman && options.hi <= 0.0) {
        // grow the bracket geometrically so expensive large-detuning runs only
        // happen when the target demands them
        double probe = lo;
        double v_probe = v_lo;
        while (v_probe < f && probe < hi) {
            probe = std::min(hi, probe * 1.3);
            v_probe = eval_coarse(probe);
            if (v_probe >= f) {
                hi = probe;
                break;
            }
            lo = probe;
            v_lo = v_probe;
        }
        v_hi = v_probe;
        if (v_hi < f) throw ThresholdUnreachable(f, v_lo, v_hi);
        if (sign * (f - v_lo) < 0.0) throw ThresholdUnreachable(f, v_lo, v_hi);
    } else {
        v_hi = eval_coarse(hi);
        const double reachable_lo = std::min(v_lo, v_hi);
        const double reachable_hi = std::max(v_lo, v_hi);
        if (f < reachable_lo || f > reachable_hi) {
            throw ThresholdUnreachable(f, reachable_lo, reachable_hi);
        }
    }

    bool polishing = false;
    double mid = 0.5 * (lo + hi);
    SearchEvaluation best;
    for (int iter = 0; iter < 80; ++iter) {
        mid = 0.5 * (lo + hi);
        polishing = polishing || (hi - lo) <= 0.05 * std::max(mid, 1e-12);
        const LambdaParams p = with_value(mid);
        SearchEvaluation eval = evaluate_point(p, polishing ? control : coarse, tol_v);
        if (polishing && std::abs(eval.v - f) <= tol_v) {
            best = std::move(eval);
            return ThresholdResult{p, mid, std::move(best.run)};
        }
        if (sign * (eval.v - f) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if ((hi - lo) <= 1e-6 * std::max(mid, 1e-12)) {
            // interval exhausted; accept the best point if it is close
            if (std::abs(eval.v - f) <= 10.0 * tol_v) {
                return ThresholdResult{p, mid, std::move(eval.run)};
            }
            break;
        }
    }
    throw std::runtime_error("rate_at_indistinguishability: bisection did not converge");
}

}  // namespace lambdasim
