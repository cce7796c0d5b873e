#include "lambdasim/matrix.hpp"

#include <Eigen/Eigenvalues>

namespace lambdasim {

double hermiticity_defect(const ComplexMatrix& a) {
    return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

bool is_hermitian(const ComplexMatrix& a, double tol) {
    if (a.rows() != a.cols()) return false;
    const double scale = a.cwiseAbs().maxCoeff();
    return hermiticity_defect(a) <= tol * std::max(scale, 1.0);
}

EigenSystem hermitian_eigensystem(const ComplexMatrix& a) {
    if (a.rows() != a.cols() || a.rows() < 1) {
        throw std::invalid_argument("hermitian_eigensystem: matrix must be square");
    }
    if (!is_hermitian(a)) {
        throw std::invalid_argument("hermitian_eigensystem: matrix is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(a);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("hermitian_eigensystem: eigensolver failed to converge");
    }
    EigenSystem sys{solver.eigenvalues(), solver.eigenvectors()};

    const double scale = std::max(a.cwiseAbs().maxCoeff(), 1.0);
    const double residual =
        (a * sys.vectors - sys.vectors * sys.values.asDiagonal()).cwiseAbs().maxCoeff();
    const double unitary_defect =
        (sys.vectors.adjoint() * sys.vectors - ComplexMatrix::Identity(a.rows(), a.cols()))
            .cwiseAbs()
            .maxCoeff();
    if (residual > 1e-10 * scale || unitary_defect > 1e-10) {
        throw std::runtime_error("hermitian_eigensystem: residual check failed");
    }
    return sys;
}

}  // namespace lambdasim
