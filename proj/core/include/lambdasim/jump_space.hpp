#pragma once

#include "lambdasim/lambda_system.hpp"
#include "lambdasim/process_space.hpp"

namespace lambdasim {

/// Process labels of the two-source HOM experiment, in block order.
/// P0: no event yet; Plus/Minus: one detection in D+/D-; Same/Diff: second
/// detection in the same/different arm; Env: a photon was lost to the
/// environment. Same, Diff and Env are population-only aggregates.
enum class ProcessLabel { P0 = 0, Plus = 1, Minus = 2, Same = 3, Diff = 4, Env = 5 };

inline constexpr int kProcessLabelCount = 6;
const char* process_label_name(ProcessLabel label);

/// Single-source basis extended by the post-detection state g1 and the
/// spontaneously decayed state g2 (both inert): {g0, e, g_a, g1, g2}.
inline constexpr int kSysG1 = 3;
inline constexpr int kSysG2 = 4;
inline constexpr int kSingleDim = 5;
inline constexpr int kPairDim = kSingleDim * kSingleDim;

/// Two-copy index, source 1 left: |i, j> -> 5 i + j.
constexpr int pair_index(int sys1, int sys2) { return kSingleDim * sys1 + sys2; }

struct PairSystem {
    ExtendedGenerator generator;
    BlockDensityMatrix initial;

    double population(const ComplexVector& flat, ProcessLabel label) const {
        return generator.block_population(flat, static_cast<int>(label));
    }
};

/// Build the full two-copy (x) process-state master equation for one parameter
/// set: the 24-state basis (9 + 6 + 6 + 1 + 1 + 1), the block Hamiltonian, the
/// detection, spontaneous-emission and phonon Lindblad terms, and the initial
/// state (|g0,g0> for Raman, |e,e> for pulse-relax).
PairSystem build_extended_space(const LambdaParams& params);

}  // namespace lambdasim
