#pragma once

// Dense complex linear algebra shared by all modules: general (non-normal)
// eigendecomposition, Hermitian eigendecomposition, and matrix functions of
// Hermitian matrices. Backed by LAPACK (zgeev / zheevd); all operations are
// pure functions and safe to call concurrently.

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <vector>

namespace nhrmt {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

namespace numerics {

// Entrywise tolerance below which a matrix is accepted as Hermitian.
inline constexpr double kHermitianTol = 1e-12;

// max_jk |m(j,k) - conj(m(k,j))|
double hermiticity_defect(const ComplexMatrix& m);

// Eigenvalues of a general square complex matrix, unsorted, with
// multiplicity. Throws std::invalid_argument for non-square or non-finite
// input and std::runtime_error (with the failing index) if the QR iteration
// does not converge.
std::vector<Complex> eig_general(const ComplexMatrix& m);

struct HermitianEigen {
    Eigen::VectorXd values;  // ascending
    ComplexMatrix vectors;   // unitary; m = vectors * values.asDiagonal() * vectors.adjoint()
};

// Eigendecomposition of a Hermitian matrix. The input is symmetrized as
// (m + m^dagger)/2 before the solve; inputs whose hermiticity defect exceeds
// kHermitianTol are rejected.
HermitianEigen eig_hermitian(const ComplexMatrix& m);

// f applied to a Hermitian matrix through its eigendecomposition:
// U f(Lambda) U^dagger.
ComplexMatrix matfun_hermitian(const ComplexMatrix& m,
                               const std::function<Complex(double)>& f);

// Same, reusing a precomputed decomposition (one sweep shares the
// decomposition of its fixed generators across members).
ComplexMatrix matfun_hermitian(const HermitianEigen& eig,
                               const std::function<Complex(double)>& f);

} // namespace numerics
} // namespace nhrmt
