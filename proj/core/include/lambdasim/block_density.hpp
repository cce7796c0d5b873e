#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "lambdasim/matrix.hpp"

namespace lambdasim {

/// Storage layout of a block-diagonal density matrix: one square block per
/// subspace, flattened column-major into a single vector. Aggregate blocks
/// (population-only subspaces) occupy one real scalar each.
struct BlockLayout {
    std::vector<std::string> labels;
    std::vector<int> dims;        // block edge length (1 for aggregates)
    std::vector<bool> aggregate;  // true: store tr(rho_block) only
    std::vector<int> offsets;     // into the flat vector
    int total = 0;

    int block_count() const { return static_cast<int>(dims.size()); }
    int index_of(std::string_view label) const;  // -1 if absent

    static std::shared_ptr<const BlockLayout> make(std::vector<std::string> labels,
                                                   std::vector<int> dims,
                                                   std::vector<bool> aggregate);
};

/// Density matrix with no cross-block coherences. Blocks are Hermitian and
/// the total trace is 1 up to integrator tolerance.
class BlockDensityMatrix {
  public:
    explicit BlockDensityMatrix(std::shared_ptr<const BlockLayout> layout);
    BlockDensityMatrix(std::shared_ptr<const BlockLayout> layout, ComplexVector flat);

    const BlockLayout& layout() const { return *layout_; }
    const std::shared_ptr<const BlockLayout>& layout_ptr() const { return layout_; }

    Eigen::Map<ComplexMatrix> block(int i);
    Eigen::Map<const ComplexMatrix> block(int i) const;

    /// tr(rho_block); for aggregates, the stored scalar.
    double block_population(int i) const;
    double trace() const;

    /// Worst absolute Hermiticity defect over all blocks.
    double hermiticity_defect() const;
    /// Smallest eigenvalue over all blocks (aggregates contribute their scalar).
    double min_eigenvalue() const;

    ComplexVector& flat() { return data_; }
    const ComplexVector& flat() const { return data_; }

  private:
    std::shared_ptr<const BlockLayout> layout_;
    ComplexVector data_;
};

/// Project a flat block state onto the Hermitian manifold:
/// B <- (B + B^dag)/2 per block, aggregates onto the real axis.
void project_hermitian(const BlockLayout& layout, ComplexVector& flat);

}  // namespace lambdasim
