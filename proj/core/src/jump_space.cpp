#include "lambdasim/jump_space.hpp"

#include <array>
#include <cmath>
#include <tuple>

namespace lambdasim {

const char* process_label_name(ProcessLabel label) {
    switch (label) {
        case ProcessLabel::P0: return "P0";
        case ProcessLabel::Plus: return "P+";
        case ProcessLabel::Minus: return "P-";
        case ProcessLabel::Same: return "P_S";
        case ProcessLabel::Diff: return "P_D";
        case ProcessLabel::Env: return "P_E";
    }
    return "?";
}

namespace {

ComplexMatrix kron5(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out = ComplexMatrix::Zero(kPairDim, kPairDim);
    for (int i = 0; i < kSingleDim; ++i) {
        for (int j = 0; j < kSingleDim; ++j) {
            if (a(i, j) == Complex(0, 0)) continue;
            out.block(i * kSingleDim, j * kSingleDim, kSingleDim, kSingleDim) = a(i, j) * b;
        }
    }
    return out;
}

// Block bases are enumerated g0 < e < g_a with the detected (g1) slots listed
// system-1-detected first.
bool pair_state_order(int lhs, int rhs) {
    auto key = [](int p) {
        const int i = p / kSingleDim;
        const int j = p % kSingleDim;
        return std::make_tuple(i == kSysG1 ? 0 : 1, i, j);
    };
    return key(lhs) < key(rhs);
}

}  // namespace

PairSystem build_extended_space(const LambdaParams& params) {
    ComplexMatrix h1 = ComplexMatrix::Zero(kSingleDim, kSingleDim);
    h1.topLeftCorner(3, 3) = bare_hamiltonian(params);
    const ComplexMatrix id = ComplexMatrix::Identity(kSingleDim, kSingleDim);
    const ComplexMatrix pair_h = kron5(h1, id) + kron5(id, h1);

    ComplexMatrix pickup = ComplexMatrix::Zero(kSingleDim, kSingleDim);
    pickup(kSysG1, kGa) = 1.0;  // photon leaves the cavity, source parked in g1
    ComplexMatrix decay = ComplexMatrix::Zero(kSingleDim, kSingleDim);
    decay(kSysG2, kE) = 1.0;

    const ComplexMatrix a1 = kron5(pickup, id);
    const ComplexMatrix a2 = kron5(id, pickup);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    // beam splitter: detector D+- sees (a1 +- a2)/sqrt(2); rate kappa per term
    const ComplexMatrix c_plus = inv_sqrt2 * (a1 + a2);
    const ComplexMatrix c_minus = inv_sqrt2 * (a1 - a2);
    const ComplexMatrix e1 = kron5(decay, id);
    const ComplexMatrix e2 = kron5(id, decay);

    ProcessGraph graph(kPairDim);
    const int p0 = graph.add_label("P0");
    const int plus = graph.add_label("P+");
    const int minus = graph.add_label("P-");
    const int same = graph.add_label("P_S", /*aggregate=*/true);
    const int diff = graph.add_label("P_D", /*aggregate=*/true);
    const int env = graph.add_label("P_E", /*aggregate=*/true);

    graph.add_event(p0, plus, c_plus, params.kappa, EventClass::DetectionPlus);
    graph.add_event(p0, minus, c_minus, params.kappa, EventClass::DetectionMinus);
    graph.add_event(plus, same, c_plus, params.kappa, EventClass::DetectionPlus);
    graph.add_event(minus, same, c_minus, params.kappa, EventClass::DetectionMinus);
    graph.add_event(plus, diff, c_minus, params.kappa, EventClass::DetectionMinus);
    graph.add_event(minus, diff, c_plus, params.kappa, EventClass::DetectionPlus);

    for (int from : {p0, plus, minus}) {
        graph.add_event(from, env, e1, params.gamma, EventClass::Spontaneous);
        graph.add_event(from, env, e2, params.gamma, EventClass::Spontaneous);
    }

    const PhononOperators phonon = phonon_operators(dressed_system(params));
    for (const ComplexMatrix* op : {&phonon.down, &phonon.up}) {
        ComplexMatrix lifted = ComplexMatrix::Zero(kSingleDim, kSingleDim);
        lifted.topLeftCorner(3, 3) = *op;
        // decoherence acts independently on each undecided subspace
        graph.add_residual(kron5(lifted, id), 1.0, EventClass::Phonon, {p0, plus, minus});
        graph.add_residual(kron5(id, lifted), 1.0, EventClass::Phonon, {p0, plus, minus});
    }

    // pin the full 9-state P0 basis so both run modes share the documented
    // 24-state structure (pulse-relax alone would prune g0 away)
    std::vector<int> p0_states;
    for (int i : {kG0, kE, kGa}) {
        for (int j : {kG0, kE, kGa}) p0_states.push_back(pair_index(i, j));
    }
    graph.add_seed_states(p0, std::move(p0_states));

    ComplexVector initial_ket = ComplexVector::Zero(kPairDim);
    const int start = params.mode == RunMode::Raman ? kG0 : kE;
    initial_ket[pair_index(start, start)] = 1.0;

    ExtendedSystem extended =
        extend_with_process_states(pair_h, graph, p0, initial_ket, pair_state_order);
    return PairSystem{std::move(extended.generator), std::move(extended.initial)};
}

}  // namespace lambdasim
