#include "lambdasim/trajectory.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "lambdasim/observables.hpp"
#include "lambdasim/ode.hpp"

namespace lambdasim {

McwfEngine::McwfEngine(const ComplexMatrix& hamiltonian, std::vector<Channel> channels,
                       double t_max)
    : channels_(std::move(channels)), t_max_(t_max) {
    const auto n = hamiltonian.rows();
    if (hamiltonian.cols() != n) throw std::invalid_argument("McwfEngine: H must be square");
    if (!is_hermitian(hamiltonian)) {
        throw std::invalid_argument("McwfEngine: Hamiltonian must be Hermitian");
    }
    h_eff_ = hamiltonian;
    for (const auto& c : channels_) {
        if (c.op.rows() != n || c.op.cols() != n) {
            throw std::invalid_argument("McwfEngine: channel dimension mismatch");
        }
        if (c.rate < 0) throw std::invalid_argument("McwfEngine: negative rate");
        h_eff_ -= Complex(0, 0.5) * c.rate * (c.op.adjoint() * c.op);
    }

    Eigen::ComplexEigenSolver<ComplexMatrix> solver(Complex(0, -1) * h_eff_);
    if (solver.info() == Eigen::Success) {
        eigenvalues_ = solver.eigenvalues();
        basis_ = solver.eigenvectors();
        Eigen::FullPivLU<ComplexMatrix> lu(basis_);
        if (lu.isInvertible()) {
            basis_inv_ = lu.inverse();
            const double scale = std::max(h_eff_.cwiseAbs().maxCoeff(), 1.0);
            const double defect = (basis_ * eigenvalues_.asDiagonal() * basis_inv_ -
                                   Complex(0, -1) * h_eff_)
                                      .cwiseAbs()
                                      .maxCoeff();
            analytic_ = defect <= 1e-9 * scale;
        }
    }
}

ComplexVector McwfEngine::evolve(const ComplexVector& psi, double dt) const {
    if (analytic_) {
        ComplexVector coeffs = basis_inv_ * psi;
        for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
            coeffs[i] *= std::exp(eigenvalues_[i] * dt);
        }
        return basis_ * coeffs;
    }
    ComplexVector y = psi;
    OdeControl control;
    control.rel_tol = 1e-10;
    control.abs_tol = 1e-13;
    control.t_max = dt;
    control.max_step_rel = 1e9;  // no sampling cap needed here
    if (dt > 0) {
        integrate_adaptive(
            y, control,
            [this](const ComplexVector& v, ComplexVector& d) {
                d.noalias() = Complex(0, -1) * (h_eff_ * v);
            },
            [](double, const ComplexVector&) {});
    }
    return y;
}

double McwfEngine::norm_loss_rate(const ComplexVector& psi) const {
    double total = 0.0;
    for (const auto& c : channels_) {
        total += c.rate * (c.op * psi).squaredNorm();
    }
    return total;
}

double McwfEngine::find_jump_time(const ComplexVector& psi, double window,
                                  double threshold) const {
    // ||psi(t)||^2 is non-increasing; bracket then bisect
    double lo = 0.0, hi = window;
    ComplexVector coeffs;
    if (analytic_) coeffs = basis_inv_ * psi;
    auto norm2_at = [&](double t) {
        if (analytic_) {
            ComplexVector scaled = coeffs;
            for (Eigen::Index i = 0; i < scaled.size(); ++i) {
                scaled[i] *= std::exp(eigenvalues_[i] * t);
            }
            return (basis_ * scaled).squaredNorm();
        }
        return evolve(psi, t).squaredNorm();
    };
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (norm2_at(mid) > threshold) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo <= 1e-12 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

Trajectory McwfEngine::run(std::uint64_t seed, std::uint64_t index, const ComplexVector& psi0,
                           const std::function<bool(const std::vector<JumpEvent>&)>& stop) const {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> uniform(std::numeric_limits<double>::min(), 1.0);

    Trajectory traj;
    traj.seed = seed;
    traj.index = index;
    ComplexVector psi = psi0.normalized();
    double t = 0.0;

    while (t < t_max_) {
        const double u = uniform(rng);
        const double window = t_max_ - t;
        if (evolve(psi, window).squaredNorm() > u) {
            traj.timed_out = true;  // no further jump inside the horizon
            break;
        }
        const double dt = find_jump_time(psi, window, u);
        psi = evolve(psi, dt);
        t += dt;

        // channel k with probability rate_k ||L_k psi||^2 / sum
        std::vector<double> weights(channels_.size());
        double total = 0.0;
        for (std::size_t k = 0; k < channels_.size(); ++k) {
            weights[k] = channels_[k].rate * (channels_[k].op * psi).squaredNorm();
            total += weights[k];
        }
        if (total <= 0.0) {
            traj.timed_out = true;
            break;
        }
        double pick = uniform(rng) * total;
        std::size_t chosen = channels_.size() - 1;
        for (std::size_t k = 0; k < channels_.size(); ++k) {
            if (pick < weights[k]) {
                chosen = k;
                break;
            }
            pick -= weights[k];
        }

        traj.events.push_back({t, static_cast<int>(chosen)});
        if (channels_[chosen].terminal) break;
        psi = channels_[chosen].op * psi;
        psi.normalize();
        traj.max_norm_defect = std::max(traj.max_norm_defect, std::abs(psi.norm() - 1.0));
        if (stop && stop(traj.events)) break;
    }
    return traj;
}

namespace {

constexpr int kBareDim = 4;  // {g0, e, g_a, g1}; g2 handled as a terminal channel
constexpr int kBarePair = kBareDim * kBareDim;

ComplexMatrix kron4(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out = ComplexMatrix::Zero(kBarePair, kBarePair);
    for (int i = 0; i < kBareDim; ++i) {
        for (int j = 0; j < kBareDim; ++j) {
            if (a(i, j) == Complex(0, 0)) continue;
            out.block(i * kBareDim, j * kBareDim, kBareDim, kBareDim) = a(i, j) * b;
        }
    }
    return out;
}

}  // namespace

McwfEngine make_pair_engine(const LambdaParams& params, double t_max) {
    ComplexMatrix h1 = ComplexMatrix::Zero(kBareDim, kBareDim);
    h1.topLeftCorner(3, 3) = bare_hamiltonian(params);
    const ComplexMatrix id = ComplexMatrix::Identity(kBareDim, kBareDim);

    ComplexMatrix pickup = ComplexMatrix::Zero(kBareDim, kBareDim);
    pickup(3, kGa) = 1.0;
    ComplexMatrix e_proj = ComplexMatrix::Zero(kBareDim, kBareDim);
    e_proj(kE, kE) = 1.0;  // projector stands in for |g2><e| in a terminal channel

    const ComplexMatrix a1 = kron4(pickup, id);
    const ComplexMatrix a2 = kron4(id, pickup);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

    const PhononOperators phonon = phonon_operators(dressed_system(params));
    ComplexMatrix down = ComplexMatrix::Zero(kBareDim, kBareDim);
    down.topLeftCorner(3, 3) = phonon.down;
    ComplexMatrix up = ComplexMatrix::Zero(kBareDim, kBareDim);
    up.topLeftCorner(3, 3) = phonon.up;

    std::vector<McwfEngine::Channel> channels(8);
    channels[static_cast<int>(PairChannel::DetectPlus)] = {inv_sqrt2 * (a1 + a2), params.kappa,
                                                           false};
    channels[static_cast<int>(PairChannel::DetectMinus)] = {inv_sqrt2 * (a1 - a2), params.kappa,
                                                            false};
    channels[static_cast<int>(PairChannel::Spont1)] = {kron4(e_proj, id), params.gamma, true};
    channels[static_cast<int>(PairChannel::Spont2)] = {kron4(id, e_proj), params.gamma, true};
    channels[static_cast<int>(PairChannel::PhononDown1)] = {kron4(down, id), 1.0, false};
    channels[static_cast<int>(PairChannel::PhononUp1)] = {kron4(up, id), 1.0, false};
    channels[static_cast<int>(PairChannel::PhononDown2)] = {kron4(id, down), 1.0, false};
    channels[static_cast<int>(PairChannel::PhononUp2)] = {kron4(id, up), 1.0, false};

    const ComplexMatrix pair_h = kron4(h1, id) + kron4(id, h1);
    return McwfEngine(pair_h, std::move(channels), t_max);
}

ComplexVector pair_initial_ket(const LambdaParams& params) {
    ComplexVector ket = ComplexVector::Zero(kBarePair);
    const int start = params.mode == RunMode::Raman ? kG0 : kE;
    ket[start * kBareDim + start] = 1.0;
    return ket;
}

TrajectoryStats sample_trajectories(const LambdaParams& params, long n, std::uint64_t seed,
                                    double t_max) {
    if (n < 1) throw std::invalid_argument("sample_trajectories: n must be >= 1");
    params.validate();
    const McwfEngine engine = make_pair_engine(params, t_max);
    const ComplexVector psi0 = pair_initial_ket(params);

    auto is_detection = [](int channel) {
        return channel == static_cast<int>(PairChannel::DetectPlus) ||
               channel == static_cast<int>(PairChannel::DetectMinus);
    };
    auto stop = [&](const std::vector<JumpEvent>& events) {
        int detections = 0;
        for (const auto& e : events) {
            if (is_detection(e.channel)) ++detections;
        }
        return detections >= 2;
    };

    std::vector<int> outcome(n);  // 0 same, 1 diff, 2 env, 3 incomplete
    parallel_for_index(static_cast<std::size_t>(n), [&](std::size_t i) {
        const Trajectory traj = engine.run(seed, i, psi0, stop);
        int first = -1;
        int result = 3;
        for (const auto& e : traj.events) {
            if (e.channel == static_cast<int>(PairChannel::Spont1) ||
                e.channel == static_cast<int>(PairChannel::Spont2)) {
                result = 2;
                break;
            }
            if (!is_detection(e.channel)) continue;
            if (first < 0) {
                first = e.channel;
            } else {
                result = (e.channel == first) ? 0 : 1;
                break;
            }
        }
        outcome[i] = result;
    });

    TrajectoryStats stats;
    stats.n = n;
    for (int o : outcome) {
        switch (o) {
            case 0: ++stats.n_same; break;
            case 1: ++stats.n_diff; break;
            case 2: ++stats.n_env; break;
            default: ++stats.n_incomplete; break;
        }
    }
    const double dn = static_cast<double>(n);
    stats.p_same = stats.n_same / dn;
    stats.p_diff = stats.n_diff / dn;
    stats.p_env = stats.n_env / dn;
    stats.p_incomplete = stats.n_incomplete / dn;
    auto se = [dn](double p) { return std::sqrt(std::max(p * (1.0 - p), 0.0) / dn); };
    stats.se_same = se(stats.p_same);
    stats.se_diff = se(stats.p_diff);
    stats.se_env = se(stats.p_env);
    return stats;
}

}  // namespace lambdasim
