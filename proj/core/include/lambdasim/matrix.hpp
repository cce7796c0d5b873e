#pragma once

#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

namespace lambdasim {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Largest entry of |A - A^dag|.
double hermiticity_defect(const ComplexMatrix& a);

/// Hermitian within tol relative to the largest entry of |A|.
bool is_hermitian(const ComplexMatrix& a, double tol = 1e-12);

struct EigenSystem {
    Eigen::VectorXd values;   // ascending
    ComplexMatrix vectors;    // orthonormal columns, vectors.col(k) <-> values[k]
};

/// Eigendecomposition of a Hermitian matrix. Throws std::invalid_argument on
/// non-Hermitian input and std::runtime_error if the solver fails to converge
/// or the residual check ||A v - lambda v|| <= 1e-10 ||A|| does not hold.
EigenSystem hermitian_eigensystem(const ComplexMatrix& a);

}  // namespace lambdasim
