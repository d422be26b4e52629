#include "nhrmt/numerics.hpp"

#include <lapacke.h>

#include <cmath>
#include <stdexcept>
#include <string>

namespace nhrmt::numerics {

namespace {

void require_square_finite(const ComplexMatrix& m, const char* who) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw std::invalid_argument(std::string(who) + ": matrix must be square, got " +
                                    std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
    if (!m.allFinite()) {
        throw std::invalid_argument(std::string(who) + ": matrix has non-finite entries");
    }
}

} // namespace

double hermiticity_defect(const ComplexMatrix& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

std::vector<Complex> eig_general(const ComplexMatrix& m) {
    require_square_finite(m, "eig_general");
    const lapack_int n = static_cast<lapack_int>(m.rows());
    ComplexMatrix work = m; // zgeev overwrites its input
    std::vector<Complex> values(static_cast<std::size_t>(n));
    const lapack_int info = LAPACKE_zgeev(
        LAPACK_COL_MAJOR, 'N', 'N', n,
        reinterpret_cast<lapack_complex_double*>(work.data()), n,
        reinterpret_cast<lapack_complex_double*>(values.data()), nullptr, 1, nullptr, 1);
    if (info < 0) {
        throw std::invalid_argument("eig_general: illegal argument " + std::to_string(-info) +
                                    " to zgeev");
    }
    if (info > 0) {
        throw std::runtime_error("eig_general: QR iteration failed to converge at index " +
                                 std::to_string(info));
    }
    return values;
}

HermitianEigen eig_hermitian(const ComplexMatrix& m) {
    require_square_finite(m, "eig_hermitian");
    const double defect = hermiticity_defect(m);
    if (defect > kHermitianTol) {
        throw std::invalid_argument("eig_hermitian: input is not Hermitian (defect " +
                                    std::to_string(defect) + ")");
    }
    const lapack_int n = static_cast<lapack_int>(m.rows());
    HermitianEigen result;
    result.vectors = (m + m.adjoint()) / 2.0; // strip floating-point drift
    result.values.resize(n);
    const lapack_int info = LAPACKE_zheevd(
        LAPACK_COL_MAJOR, 'V', 'L', n,
        reinterpret_cast<lapack_complex_double*>(result.vectors.data()), n,
        result.values.data());
    if (info != 0) {
        throw std::runtime_error("eig_hermitian: zheevd failed with info " + std::to_string(info));
    }
    return result;
}

ComplexMatrix matfun_hermitian(const ComplexMatrix& m,
                               const std::function<Complex(double)>& f) {
    return matfun_hermitian(eig_hermitian(m), f);
}

ComplexMatrix matfun_hermitian(const HermitianEigen& eig,
                               const std::function<Complex(double)>& f) {
    const Eigen::Index n = eig.values.size();
    Eigen::VectorXcd fvals(n);
    for (Eigen::Index i = 0; i < n; ++i) fvals(i) = f(eig.values(i));
    return eig.vectors * fvals.asDiagonal() * eig.vectors.adjoint();
}

} // namespace nhrmt::numerics
