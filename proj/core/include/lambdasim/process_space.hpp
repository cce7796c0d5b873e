#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "lambdasim/block_density.hpp"
#include "lambdasim/matrix.hpp"
#include "lambdasim/ode.hpp"

namespace lambdasim {

enum class EventClass { DetectionPlus, DetectionMinus, Spontaneous, Phonon, Generic };

/// Jump graph over process labels. Events move population between labels
/// (edges of a DAG); residual Lindblads act within each listed label
/// independently. Aggregate labels track total population only.
class ProcessGraph {
  public:
    struct Label {
        std::string name;
        bool aggregate = false;
    };
    struct Event {
        int from = 0;
        int to = 0;
        ComplexMatrix op;
        double rate = 0.0;
        EventClass cls = EventClass::Generic;
    };
    struct Residual {
        ComplexMatrix op;
        double rate = 0.0;
        EventClass cls = EventClass::Generic;
        std::vector<int> labels;  // empty: every non-aggregate label
    };

    explicit ProcessGraph(int system_dim) : system_dim_(system_dim) {}

    int add_label(std::string name, bool aggregate = false);
    void add_event(int from, int to, ComplexMatrix op, double rate,
                   EventClass cls = EventClass::Generic);
    void add_residual(ComplexMatrix op, double rate, EventClass cls = EventClass::Generic,
                      std::vector<int> labels = {});
    /// Pin extra system states into a label's basis regardless of
    /// reachability from the initial state.
    void add_seed_states(int label, std::vector<int> states);

    int system_dim() const { return system_dim_; }
    const std::vector<Label>& labels() const { return labels_; }
    const std::vector<Event>& events() const { return events_; }
    const std::vector<Residual>& residuals() const { return residuals_; }
    const std::vector<std::pair<int, std::vector<int>>>& seed_states() const {
        return seed_states_;
    }

  private:
    int system_dim_;
    std::vector<Label> labels_;
    std::vector<Event> events_;
    std::vector<Residual> residuals_;
    std::vector<std::pair<int, std::vector<int>>> seed_states_;
};

/// One Lindblad operator of the extended master equation. `op` holds only the
/// (target x source) rectangle; entries outside it are zero by construction.
/// For aggregate targets the rows span the virtual destination states and the
/// gain contributes rate * tr(op rho op^dag) to the target scalar.
struct LindbladTerm {
    EventClass event_class = EventClass::Generic;
    double rate = 0.0;
    int source = 0;
    int target = 0;
    bool aggregate_target = false;
    ComplexMatrix op;
    ComplexMatrix op_dag_op;  // cached op^dag op on the source block
};

/// The extended generator: block Hamiltonians plus Lindblad terms, with a
/// precompiled sparse Liouvillian for the hot path. Immutable after
/// construction; safe to share across concurrent propagations.
class ExtendedGenerator {
  public:
    /// drho/dt via the precompiled sparse Liouvillian.
    void apply(const ComplexVector& rho, ComplexVector& out) const;
    /// Reference path: commutator plus term-by-term dissipator.
    void apply_terms(const ComplexVector& rho, ComplexVector& out) const;
    /// Dissipator contribution of a single term (for linearity checks).
    void apply_single_term(std::size_t index, const ComplexVector& rho,
                           ComplexVector& out) const;
    void apply_hamiltonian(const ComplexVector& rho, ComplexVector& out) const;

    const std::shared_ptr<const BlockLayout>& layout() const { return layout_; }
    /// Retained system-basis states per block (virtual rows for aggregates).
    const std::vector<std::vector<int>>& block_basis() const { return basis_; }
    const std::vector<ComplexMatrix>& hamiltonians() const { return hamiltonians_; }
    const std::vector<LindbladTerm>& terms() const { return terms_; }

    double block_population(const ComplexVector& rho, int block) const;
    /// Population outside the aggregate blocks (the "incomplete" monitor).
    double nonaggregate_population(const ComplexVector& rho) const;

    BlockDensityMatrix zero_state() const { return BlockDensityMatrix(layout_); }

  private:
    friend class ExtendedSpaceBuilder;
    std::shared_ptr<const BlockLayout> layout_;
    std::vector<std::vector<int>> basis_;
    std::vector<ComplexMatrix> hamiltonians_;  // 0x0 when a block has none
    std::vector<LindbladTerm> terms_;
    // Liouvillian in CSR form; the generic sparse container is an order of
    // magnitude slower than this flat loop on our ~2k-entry operators
    std::vector<int> row_start_;
    std::vector<int> col_index_;
    std::vector<Complex> value_;

    void build_liouvillian();
};

struct ExtendedSystem {
    ExtendedGenerator generator;
    BlockDensityMatrix initial;
};

/// Appendix-style construction: H -> H (x) I per label, events J (x) |b><a|,
/// residual Lindblads copied onto their labels, and basis states unreachable
/// from the initial state pruned. `state_order` optionally fixes the retained
/// basis ordering within each block (strict weak order on system indices).
/// Throws std::invalid_argument for cyclic jump graphs.
ExtendedSystem extend_with_process_states(
    const ComplexMatrix& system_hamiltonian, const ProcessGraph& graph, int initial_label,
    const ComplexVector& initial_ket,
    const std::function<bool(int, int)>& state_order = {});

/// Adaptive propagation of the extended master equation. The observer is
/// called as observer(t, flat) at t = 0 and after every accepted step;
/// termination is controlled by the population outside the aggregate blocks.
template <class Observer>
IntegrationReport propagate(BlockDensityMatrix& rho, const ExtendedGenerator& generator,
                            const OdeControl& control, Observer&& observer) {
    auto rhs = [&generator](const ComplexVector& y, ComplexVector& dydt) {
        generator.apply(y, dydt);
    };
    auto monitor = [&generator](const ComplexVector& y) {
        return generator.nonaggregate_population(y);
    };
    auto keep_hermitian = [&generator](ComplexVector& y) {
        project_hermitian(*generator.layout(), y);
    };
    return integrate_adaptive(rho.flat(), control, rhs, std::forward<Observer>(observer),
                              monitor, keep_hermitian);
}

inline IntegrationReport propagate(BlockDensityMatrix& rho, const ExtendedGenerator& generator,
                                   const OdeControl& control) {
    return propagate(rho, generator, control, [](double, const ComplexVector&) {});
}

}  // namespace lambdasim
