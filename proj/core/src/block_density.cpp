#include "lambdasim/block_density.hpp"

#include <Eigen/Eigenvalues>

namespace lambdasim {

int BlockLayout::index_of(std::string_view label) const {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == label) return static_cast<int>(i);
    }
    return -1;
}

std::shared_ptr<const BlockLayout> BlockLayout::make(std::vector<std::string> labels,
                                                     std::vector<int> dims,
                                                     std::vector<bool> aggregate) {
    if (labels.size() != dims.size() || labels.size() != aggregate.size()) {
        throw std::invalid_argument("BlockLayout: size mismatch");
    }
    auto layout = std::make_shared<BlockLayout>();
    layout->labels = std::move(labels);
    layout->dims = std::move(dims);
    layout->aggregate = std::move(aggregate);
    layout->offsets.resize(layout->dims.size());
    int off = 0;
    for (std::size_t i = 0; i < layout->dims.size(); ++i) {
        if (layout->dims[i] < 1) throw std::invalid_argument("BlockLayout: dim < 1");
        if (layout->aggregate[i] && layout->dims[i] != 1) {
            throw std::invalid_argument("BlockLayout: aggregate blocks have dim 1");
        }
        layout->offsets[i] = off;
        off += layout->aggregate[i] ? 1 : layout->dims[i] * layout->dims[i];
    }
    layout->total = off;
    return layout;
}

BlockDensityMatrix::BlockDensityMatrix(std::shared_ptr<const BlockLayout> layout)
    : layout_(std::move(layout)), data_(ComplexVector::Zero(layout_->total)) {}

BlockDensityMatrix::BlockDensityMatrix(std::shared_ptr<const BlockLayout> layout,
                                       ComplexVector flat)
    : layout_(std::move(layout)), data_(std::move(flat)) {
    if (data_.size() != layout_->total) {
        throw std::invalid_argument("BlockDensityMatrix: flat size mismatch");
    }
}

Eigen::Map<ComplexMatrix> BlockDensityMatrix::block(int i) {
    const int d = layout_->dims[i];
    return {data_.data() + layout_->offsets[i], d, d};
}

Eigen::Map<const ComplexMatrix> BlockDensityMatrix::block(int i) const {
    const int d = layout_->dims[i];
    return {data_.data() + layout_->offsets[i], d, d};
}

double BlockDensityMatrix::block_population(int i) const {
    if (layout_->aggregate[i]) return data_[layout_->offsets[i]].real();
    return block(i).trace().real();
}

double BlockDensityMatrix::trace() const {
    double tr = 0.0;
    for (int i = 0; i < layout_->block_count(); ++i) tr += block_population(i);
    return tr;
}

double BlockDensityMatrix::hermiticity_defect() const {
    double worst = 0.0;
    for (int i = 0; i < layout_->block_count(); ++i) {
        if (layout_->aggregate[i]) {
            worst = std::max(worst, std::abs(data_[layout_->offsets[i]].imag()));
        } else {
            worst = std::max(worst, lambdasim::hermiticity_defect(block(i)));
        }
    }
    return worst;
}

void project_hermitian(const BlockLayout& layout, ComplexVector& flat) {
    for (int b = 0; b < layout.block_count(); ++b) {
        const int off = layout.offsets[b];
        if (layout.aggregate[b]) {
            flat[off] = Complex(flat[off].real(), 0.0);
            continue;
        }
        const int d = layout.dims[b];
        Eigen::Map<ComplexMatrix> block(flat.data() + off, d, d);
        for (int i = 0; i < d; ++i) {
            block(i, i) = Complex(block(i, i).real(), 0.0);
            for (int j = i + 1; j < d; ++j) {
                const Complex mean = 0.5 * (block(i, j) + std::conj(block(j, i)));
                block(i, j) = mean;
                block(j, i) = std::conj(mean);
            }
        }
    }
}

double BlockDensityMatrix::min_eigenvalue() const {
    double lowest = std::numeric_limits<double>::infinity();
    for (int i = 0; i < layout_->block_count(); ++i) {
        if (layout_->aggregate[i]) {
            lowest = std::min(lowest, data_[layout_->offsets[i]].real());
        } else {
            ComplexMatrix b = block(i);
            b = Complex(0.5, 0.0) * (b + b.adjoint());  // symmetrize integrator noise
            Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(b,
                                                                Eigen::EigenvaluesOnly);
            lowest = std::min(lowest, solver.eigenvalues().minCoeff());
        }
    }
    return lowest;
}

}  // namespace lambdasim
