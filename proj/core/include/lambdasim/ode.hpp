#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "lambdasim/matrix.hpp"

namespace lambdasim {

/// Tolerances and limits for one adaptive propagation. Times in ps.
struct OdeControl {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double max_step = 1e4;                // absolute step cap, ps
    double max_step_rel = 0.05;           // step <= max_step_rel * t once t > 0
    double t_max = 1e5;                   // horizon, ps
    double termination_threshold = 1e-4;  // stop when the monitored population drops below

    void validate() const;
};

struct StepSizeUnderflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IntegrationReport {
    double t_end = 0.0;
    bool terminated = false;  // monitor fell below the threshold (vs. t_max reached)
    std::size_t steps_accepted = 0;
    std::size_t steps_rejected = 0;
    double accumulated_error = 0.0;  // running sum of accepted local error estimates
};

namespace detail {

// Dormand-Prince 5(4) tableau.
inline constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
// kA[6] is also the 5th-order weight row (FSAL); the embedded 4th-order weights:
inline constexpr double kB4[7] = {5179.0 / 57600, 0.0,           7571.0 / 16695, 393.0 / 640,
                                  -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

}  // namespace detail

/// Adaptive Dormand-Prince 5(4) propagation of dy/dt = rhs(y).
///
/// rhs:         void(const ComplexVector& y, ComplexVector& dydt)
/// observer:    void(double t, const ComplexVector& y), called at t=0 and
///              after every accepted step
/// monitor:     double(const ComplexVector& y); integration stops once the
///              value drops below control.termination_threshold
/// postprocess: void(ComplexVector& y), applied right after a step is
///              accepted. Used to project the state back onto an invariant
///              manifold (e.g. Hermitian blocks); once the solution is slow on
///              the stiffest scale, the controller rides the stability
///              boundary and tolerance-level noise accumulates in sectors the
///              exact flow keeps invariant.
template <class Rhs, class Observer, class Monitor, class Postprocess>
IntegrationReport integrate_adaptive(ComplexVector& y, const OdeControl& control, Rhs&& rhs,
                                     Observer&& observer, Monitor&& monitor,
                                     Postprocess&& postprocess) {
    using detail::kA;
    using detail::kB4;
    using detail::kC;

    control.validate();
    const auto n = y.size();
    ComplexVector k[7];
    for (auto& ki : k) ki.resize(n);
    ComplexVector y_stage(n), y_new(n), err(n);

    IntegrationReport report;
    double t = 0.0;

    auto step_cap = [&](double at) {
        return std::min(control.max_step, std::max(control.max_step_rel * at, 1e-2));
    };

    rhs(y, k[0]);
    observer(0.0, y);
    if (monitor(y) < control.termination_threshold) {
        report.terminated = true;
        return report;
    }

    // initial step from the local velocity
    double dt;
    {
        const double ynorm = y.cwiseAbs().maxCoeff();
        const double fnorm = k[0].cwiseAbs().maxCoeff();
        dt = (fnorm > 0.0) ? 0.01 * std::max(ynorm, control.abs_tol) / fnorm : step_cap(0.0);
        dt = std::min({dt, step_cap(0.0), control.t_max});
        dt = std::max(dt, 1e-12);
    }

    bool fsal_valid = true;
    while (t < control.t_max) {
        dt = std::min({dt, step_cap(t), control.t_max - t});
        if (dt < 1e-14 * std::max(1.0, std::abs(t))) {
            throw StepSizeUnderflow("integrate_adaptive: step size underflow at t = " +
                                    std::to_string(t));
        }
        if (!fsal_valid) rhs(y, k[0]);

        for (int s = 1; s < 7; ++s) {
            y_stage = y;
            for (int j = 0; j < s; ++j) {
                if (kA[s][j] != 0.0) y_stage.noalias() += (dt * kA[s][j]) * k[j];
            }
            rhs(y_stage, k[s]);
        }
        // stage 6 evaluated y_new = y + dt * sum(kA[6][j] k_j); reuse it
        y_new.swap(y_stage);

        err.setZero();
        for (int j = 0; j < 7; ++j) {
            const double d = (j < 6 ? kA[6][j] : 0.0) - kB4[j];
            if (d != 0.0) err.noalias() += (dt * d) * k[j];
        }
        double err_norm = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double scale =
                control.abs_tol +
                control.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
            err_norm = std::max(err_norm, std::abs(err[i]) / scale);
        }

        if (err_norm <= 1.0) {
            t += dt;
            y.swap(y_new);
            postprocess(y);
            k[0].swap(k[6]);  // FSAL
            fsal_valid = true;
            ++report.steps_accepted;
            report.accumulated_error +=
                err_norm * (control.abs_tol + control.rel_tol * y.cwiseAbs().maxCoeff());
            observer(t, y);
            if (monitor(y) < control.termination_threshold) {
                report.terminated = true;
                break;
            }
        } else {
            ++report.steps_rejected;
            fsal_valid = false;
        }
        const double factor =
            (err_norm > 1e-12) ? 0.9 * std::pow(err_norm, -0.2) : 5.0;
        dt *= std::clamp(factor, 0.2, 5.0);
    }
    report.t_end = t;
    return report;
}

template <class Rhs, class Observer, class Monitor>
IntegrationReport integrate_adaptive(ComplexVector& y, const OdeControl& control, Rhs&& rhs,
                                     Observer&& observer, Monitor&& monitor) {
    return integrate_adaptive(y, control, std::forward<Rhs>(rhs),
                              std::forward<Observer>(observer), std::forward<Monitor>(monitor),
                              [](ComplexVector&) {});
}

template <class Rhs, class Observer>
IntegrationReport integrate_adaptive(ComplexVector& y, const OdeControl& control, Rhs&& rhs,
                                     Observer&& observer) {
    return integrate_adaptive(y, control, std::forward<Rhs>(rhs),
                              std::forward<Observer>(observer),
                              [](const ComplexVector&) { return 1.0; });
}

}  // namespace lambdasim
