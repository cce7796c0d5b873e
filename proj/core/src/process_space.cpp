#include "lambdasim/process_space.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace lambdasim {

int ProcessGraph::add_label(std::string name, bool aggregate) {
    labels_.push_back({std::move(name), aggregate});
    return static_cast<int>(labels_.size()) - 1;
}

void ProcessGraph::add_event(int from, int to, ComplexMatrix op, double rate, EventClass cls) {
    const int n = static_cast<int>(labels_.size());
    if (from < 0 || from >= n || to < 0 || to >= n) {
        throw std::invalid_argument("ProcessGraph: event label out of range");
    }
    if (from == to) throw std::invalid_argument("ProcessGraph: event must change the label");
    if (labels_[from].aggregate) {
        // population-only labels carry no state for an operator to act on
        throw std::invalid_argument("ProcessGraph: events cannot leave an aggregate label");
    }
    if (op.rows() != system_dim_ || op.cols() != system_dim_) {
        throw std::invalid_argument("ProcessGraph: event operator dimension mismatch");
    }
    if (rate < 0) throw std::invalid_argument("ProcessGraph: negative rate");
    events_.push_back({from, to, std::move(op), rate, cls});
}

void ProcessGraph::add_residual(ComplexMatrix op, double rate, EventClass cls,
                                std::vector<int> labels) {
    if (op.rows() != system_dim_ || op.cols() != system_dim_) {
        throw std::invalid_argument("ProcessGraph: residual operator dimension mismatch");
    }
    if (rate < 0) throw std::invalid_argument("ProcessGraph: negative rate");
    residuals_.push_back({std::move(op), rate, cls, std::move(labels)});
}

void ProcessGraph::add_seed_states(int label, std::vector<int> states) {
    for (int s : states) {
        if (s < 0 || s >= system_dim_) {
            throw std::invalid_argument("ProcessGraph: seed state out of range");
        }
    }
    seed_states_.emplace_back(label, std::move(states));
}

namespace {

std::vector<int> topological_order(const ProcessGraph& graph) {
    const int n = static_cast<int>(graph.labels().size());
    std::vector<std::vector<int>> adj(n);
    std::vector<int> indeg(n, 0);
    for (const auto& e : graph.events()) {
        adj[e.from].push_back(e.to);
        ++indeg[e.to];
    }
    std::vector<int> order, stack;
    for (int i = 0; i < n; ++i) {
        if (indeg[i] == 0) stack.push_back(i);
    }
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        order.push_back(u);
        for (int v : adj[u]) {
            if (--indeg[v] == 0) stack.push_back(v);
        }
    }
    if (static_cast<int>(order.size()) != n) {
        throw std::invalid_argument("extend_with_process_states: cyclic jump graph");
    }
    return order;
}

bool residual_applies(const ProcessGraph::Residual& r, int label) {
    if (r.labels.empty()) return true;
    return std::find(r.labels.begin(), r.labels.end(), label) != r.labels.end();
}

// Close a support set under the block dynamics: states connected through H,
// a residual L, or its L^dag L.
std::set<int> close_support(const ProcessGraph& graph, const ComplexMatrix& h, int label,
                            const std::set<int>& seed) {
    const int n = graph.system_dim();
    std::vector<ComplexMatrix> mats;
    mats.push_back(h);
    for (const auto& r : graph.residuals()) {
        if (r.rate > 0 && residual_applies(r, label)) {
            mats.push_back(r.op);
            mats.push_back(r.op.adjoint() * r.op);
        }
    }
    std::set<int> support = seed;
    std::vector<int> frontier(seed.begin(), seed.end());
    while (!frontier.empty()) {
        const int j = frontier.back();
        frontier.pop_back();
        for (const auto& m : mats) {
            for (int i = 0; i < n; ++i) {
                if (m(i, j) != Complex(0, 0) && !support.contains(i)) {
                    support.insert(i);
                    frontier.push_back(i);
                }
            }
        }
    }
    return support;
}

}  // namespace

class ExtendedSpaceBuilder {
  public:
    static ExtendedSystem build(const ComplexMatrix& system_h, const ProcessGraph& graph,
                                int initial_label, const ComplexVector& initial_ket,
                                const std::function<bool(int, int)>& state_order);
};

ExtendedSystem extend_with_process_states(const ComplexMatrix& system_hamiltonian,
                                          const ProcessGraph& graph, int initial_label,
                                          const ComplexVector& initial_ket,
                                          const std::function<bool(int, int)>& state_order) {
    return ExtendedSpaceBuilder::build(system_hamiltonian, graph, initial_label, initial_ket,
                                       state_order);
}

ExtendedSystem ExtendedSpaceBuilder::build(const ComplexMatrix& system_h,
                                           const ProcessGraph& graph, int initial_label,
                                           const ComplexVector& initial_ket,
                                           const std::function<bool(int, int)>& state_order) {
    const int n = graph.system_dim();
    if (system_h.rows() != n || system_h.cols() != n) {
        throw std::invalid_argument("extend_with_process_states: Hamiltonian dimension");
    }
    if (initial_ket.size() != n) {
        throw std::invalid_argument("extend_with_process_states: initial ket dimension");
    }
    if (!is_hermitian(system_h)) {
        throw std::invalid_argument("extend_with_process_states: Hamiltonian not Hermitian");
    }
    const int nlabels = static_cast<int>(graph.labels().size());
    if (initial_label < 0 || initial_label >= nlabels) {
        throw std::invalid_argument("extend_with_process_states: bad initial label");
    }

    const std::vector<int> topo = topological_order(graph);

    // reachable support per label
    std::vector<std::set<int>> seeds(nlabels), support(nlabels);
    for (int i = 0; i < n; ++i) {
        if (initial_ket[i] != Complex(0, 0)) seeds[initial_label].insert(i);
    }
    for (const auto& [label, states] : graph.seed_states()) {
        seeds[label].insert(states.begin(), states.end());
    }
    for (int label : topo) {
        if (seeds[label].empty()) continue;
        support[label] = graph.labels()[label].aggregate
                             ? seeds[label]
                             : close_support(graph, system_h, label, seeds[label]);
        for (const auto& e : graph.events()) {
            if (e.from != label || e.rate == 0) continue;
            for (int j : support[label]) {
                for (int i = 0; i < n; ++i) {
                    if (e.op(i, j) != Complex(0, 0)) seeds[e.to].insert(i);
                }
            }
        }
    }

    auto ordered = [&](const std::set<int>& states) {
        std::vector<int> out(states.begin(), states.end());
        if (state_order) std::stable_sort(out.begin(), out.end(), state_order);
        return out;
    };

    ExtendedGenerator gen;
    gen.basis_.resize(nlabels);
    gen.hamiltonians_.resize(nlabels);

    std::vector<std::string> names;
    std::vector<int> dims;
    std::vector<bool> aggregate;
    for (int label = 0; label < nlabels; ++label) {
        const bool agg = graph.labels()[label].aggregate;
        gen.basis_[label] = ordered(support[label]);
        names.push_back(graph.labels()[label].name);
        aggregate.push_back(agg);
        // unreachable non-aggregate labels stay as inert one-dimensional blocks
        dims.push_back(agg ? 1 : std::max<int>(1, gen.basis_[label].size()));
    }
    gen.layout_ = BlockLayout::make(std::move(names), std::move(dims), std::move(aggregate));

    auto restrict_matrix = [](const ComplexMatrix& m, const std::vector<int>& rows,
                              const std::vector<int>& cols) {
        ComplexMatrix out(rows.size(), cols.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            for (std::size_t c = 0; c < cols.size(); ++c) out(r, c) = m(rows[r], cols[c]);
        }
        return out;
    };

    for (int label = 0; label < nlabels; ++label) {
        if (graph.labels()[label].aggregate || gen.basis_[label].empty()) continue;
        ComplexMatrix hb = restrict_matrix(system_h, gen.basis_[label], gen.basis_[label]);
        if (hb.cwiseAbs().maxCoeff() > 0) gen.hamiltonians_[label] = std::move(hb);
    }

    for (const auto& e : graph.events()) {
        if (e.rate == 0 || gen.basis_[e.from].empty()) continue;
        const auto& src = gen.basis_[e.from];
        LindbladTerm term;
        term.event_class = e.cls;
        term.rate = e.rate;
        term.source = e.from;
        term.target = e.to;
        term.aggregate_target = graph.labels()[e.to].aggregate;
        if (term.aggregate_target) {
            std::set<int> rows;
            for (int j : src) {
                for (int i = 0; i < n; ++i) {
                    if (e.op(i, j) != Complex(0, 0)) rows.insert(i);
                }
            }
            if (rows.empty()) continue;
            term.op = restrict_matrix(e.op, ordered(rows), src);
        } else {
            term.op = restrict_matrix(e.op, gen.basis_[e.to], src);
            if (term.op.cwiseAbs().maxCoeff() == 0) continue;
        }
        term.op_dag_op = term.op.adjoint() * term.op;
        gen.terms_.push_back(std::move(term));
    }

    for (const auto& r : graph.residuals()) {
        if (r.rate == 0) continue;
        for (int label = 0; label < nlabels; ++label) {
            if (graph.labels()[label].aggregate || gen.basis_[label].empty()) continue;
            if (!residual_applies(r, label)) continue;
            ComplexMatrix op = restrict_matrix(r.op, gen.basis_[label], gen.basis_[label]);
            if (op.cwiseAbs().maxCoeff() == 0) continue;
            LindbladTerm term;
            term.event_class = r.cls;
            term.rate = r.rate;
            term.source = label;
            term.target = label;
            term.aggregate_target = false;
            term.op = std::move(op);
            term.op_dag_op = term.op.adjoint() * term.op;
            gen.terms_.push_back(std::move(term));
        }
    }

    gen.build_liouvillian();

    BlockDensityMatrix rho0(gen.layout_);
    {
        const auto& basis0 = gen.basis_[initial_label];
        ComplexVector ket(basis0.size());
        for (std::size_t i = 0; i < basis0.size(); ++i) ket[i] = initial_ket[basis0[i]];
        if (graph.labels()[initial_label].aggregate) {
            rho0.flat()[gen.layout_->offsets[initial_label]] = ket.squaredNorm();
        } else {
            rho0.block(initial_label) = ket * ket.adjoint();
        }
    }
    return ExtendedSystem{std::move(gen), std::move(rho0)};
}

void ExtendedGenerator::build_liouvillian() {
    using Triplet = Eigen::Triplet<Complex>;
    std::vector<Triplet> trips;
    const auto& offsets = layout_->offsets;
    const auto& dims = layout_->dims;
    const Complex minus_i(0, -1);

    for (int b = 0; b < layout_->block_count(); ++b) {
        const auto& h = hamiltonians_[b];
        if (h.size() == 0 || layout_->aggregate[b]) continue;
        const int d = dims[b];
        const int off = offsets[b];
        // vec(-i[H, rho]) = -i (I (x) H - H^T (x) I) vec(rho), column-major
        for (int col = 0; col < d; ++col) {
            for (int r = 0; r < d; ++r) {
                for (int c = 0; c < d; ++c) {
                    if (h(r, c) == Complex(0, 0)) continue;
                    trips.emplace_back(off + r + d * col, off + c + d * col, minus_i * h(r, c));
                    trips.emplace_back(off + col + d * r, off + col + d * c,
                                       -minus_i * std::conj(h(r, c)));
                }
            }
        }
    }

    for (const auto& term : terms_) {
        const int ds = dims[term.source];
        const int soff = offsets[term.source];
        const ComplexMatrix& m = term.op_dag_op;
        // loss: -(rate/2)(M rho + rho M)
        for (int col = 0; col < ds; ++col) {
            for (int r = 0; r < ds; ++r) {
                for (int c = 0; c < ds; ++c) {
                    if (m(r, c) == Complex(0, 0)) continue;
                    trips.emplace_back(soff + r + ds * col, soff + c + ds * col,
                                       -0.5 * term.rate * m(r, c));
                    trips.emplace_back(soff + col + ds * r, soff + col + ds * c,
                                       -0.5 * term.rate * std::conj(m(r, c)));
                }
            }
        }
        if (term.aggregate_target) {
            // gain: rate * tr(rho M) into the scalar
            const int toff = offsets[term.target];
            for (int i = 0; i < ds; ++i) {
                for (int j = 0; j < ds; ++j) {
                    if (m(j, i) == Complex(0, 0)) continue;
                    trips.emplace_back(toff, soff + i + ds * j, term.rate * m(j, i));
                }
            }
        } else {
            // gain: rate * vec(A rho A^dag) = rate (conj(A) (x) A) vec(rho)
            const int dt = dims[term.target];
            const int toff = offsets[term.target];
            const ComplexMatrix& a = term.op;
            for (int i = 0; i < dt; ++i) {
                for (int j = 0; j < ds; ++j) {
                    if (a(i, j) == Complex(0, 0)) continue;
                    for (int k = 0; k < dt; ++k) {
                        for (int l = 0; l < ds; ++l) {
                            if (a(k, l) == Complex(0, 0)) continue;
                            trips.emplace_back(toff + i + dt * k, soff + j + ds * l,
                                               term.rate * a(i, j) * std::conj(a(k, l)));
                        }
                    }
                }
            }
        }
    }

    Eigen::SparseMatrix<Complex, Eigen::RowMajor> assembled(layout_->total, layout_->total);
    assembled.setFromTriplets(trips.begin(), trips.end());
    assembled.makeCompressed();
    assembled.prune([](int, int, const Complex& v) { return v != Complex(0, 0); });

    const int rows = layout_->total;
    row_start_.assign(assembled.outerIndexPtr(), assembled.outerIndexPtr() + rows + 1);
    col_index_.assign(assembled.innerIndexPtr(), assembled.innerIndexPtr() + assembled.nonZeros());
    value_.assign(assembled.valuePtr(), assembled.valuePtr() + assembled.nonZeros());
}

void ExtendedGenerator::apply(const ComplexVector& rho, ComplexVector& out) const {
    const Complex* x = rho.data();
    const int rows = layout_->total;
    for (int i = 0; i < rows; ++i) {
        double acc_re = 0.0, acc_im = 0.0;
        for (int k = row_start_[i]; k < row_start_[i + 1]; ++k) {
            const Complex v = value_[k];
            const Complex xc = x[col_index_[k]];
            acc_re += v.real() * xc.real() - v.imag() * xc.imag();
            acc_im += v.real() * xc.imag() + v.imag() * xc.real();
        }
        out[i] = Complex(acc_re, acc_im);
    }
}

void ExtendedGenerator::apply_hamiltonian(const ComplexVector& rho, ComplexVector& out) const {
    const Complex minus_i(0, -1);
    for (int b = 0; b < layout_->block_count(); ++b) {
        const auto& h = hamiltonians_[b];
        if (h.size() == 0 || layout_->aggregate[b]) continue;
        const int d = layout_->dims[b];
        const int off = layout_->offsets[b];
        Eigen::Map<const ComplexMatrix> rb(rho.data() + off, d, d);
        Eigen::Map<ComplexMatrix> ob(out.data() + off, d, d);
        ob.noalias() += minus_i * (h * rb - rb * h);
    }
}

void ExtendedGenerator::apply_single_term(std::size_t index, const ComplexVector& rho,
                                          ComplexVector& out) const {
    const auto& term = terms_.at(index);
    const int ds = layout_->dims[term.source];
    const int soff = layout_->offsets[term.source];
    Eigen::Map<const ComplexMatrix> rs(rho.data() + soff, ds, ds);
    Eigen::Map<ComplexMatrix> os(out.data() + soff, ds, ds);
    os.noalias() -= (0.5 * term.rate) * (term.op_dag_op * rs + rs * term.op_dag_op);
    if (term.aggregate_target) {
        out[layout_->offsets[term.target]] +=
            term.rate * (term.op_dag_op * rs).trace();
    } else {
        const int dt = layout_->dims[term.target];
        Eigen::Map<ComplexMatrix> ot(out.data() + layout_->offsets[term.target], dt, dt);
        ot.noalias() += term.rate * (term.op * rs * term.op.adjoint());
    }
}

void ExtendedGenerator::apply_terms(const ComplexVector& rho, ComplexVector& out) const {
    out.setZero();
    apply_hamiltonian(rho, out);
    for (std::size_t i = 0; i < terms_.size(); ++i) apply_single_term(i, rho, out);
}

double ExtendedGenerator::block_population(const ComplexVector& rho, int block) const {
    const int off = layout_->offsets[block];
    if (layout_->aggregate[block]) return rho[off].real();
    const int d = layout_->dims[block];
    double tr = 0.0;
    for (int i = 0; i < d; ++i) tr += rho[off + i + d * i].real();
    return tr;
}

double ExtendedGenerator::nonaggregate_population(const ComplexVector& rho) const {
    double pop = 0.0;
    for (int b = 0; b < layout_->block_count(); ++b) {
        if (!layout_->aggregate[b]) pop += block_population(rho, b);
    }
    return pop;
}

}  // namespace lambdasim
