#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace qot {

using Cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

constexpr double kPi = 3.14159265358979323846;

// Ascending eigenvalues of a Hermitian matrix (tridiagonalization + implicit
// shifts; delegated to LAPACK zheev/dsyev when available).
struct HermitianEig {
  RVec values;
  Mat vectors;  // columns are eigenvectors
};

HermitianEig hermitian_eig(const Mat& a);
RVec hermitian_eigenvalues(const Mat& a);

// Clip negative eigenvalues to zero: nearest PSD matrix in Frobenius norm.
Mat project_psd(const Mat& a);
RMat project_psd(const RMat& a);

// Hermitian square root of a PSD matrix (negative eigenvalues clipped).
Mat sqrt_psd(const Mat& a);
RMat sqrt_psd(const RMat& a);

Mat kron(const Mat& a, const Mat& b);

double min_eigenvalue(const Mat& a);

// ||a||, ||a||_2, ||a||_1 (operator, Hilbert-Schmidt, trace norm) via SVD.
double operator_norm(const Mat& a);
double trace_norm(const Mat& a);

inline double hs_norm(const Mat& a) { return a.norm(); }

inline Mat adjoint(const Mat& a) { return a.adjoint(); }

inline double hermiticity_defect(const Mat& a) { return (a - a.adjoint()).norm(); }

inline Cd trace_of(const Mat& a) { return a.trace(); }

inline Mat hermitize(const Mat& a) { return 0.5 * (a + a.adjoint()); }

}  // namespace qot
