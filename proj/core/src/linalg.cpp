#include "qot/linalg.hpp"

#include <cstdlib>
#include <stdexcept>

namespace qot {

namespace {
// Pin BLAS to one thread before any call so reductions are order-stable.
struct BlasSingleThreadInit {
  BlasSingleThreadInit() {
#ifdef QOT_HAVE_LAPACKE
    ::setenv("OPENBLAS_NUM_THREADS", "1", 0);
    ::setenv("OMP_NUM_THREADS", "1", 0);
#endif
  }
};
const BlasSingleThreadInit blas_init{};
}  // namespace

HermitianEig hermitian_eig(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  if (es.info() != Eigen::Success) throw std::runtime_error("hermitian_eig failed to converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

RVec hermitian_eigenvalues(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("hermitian_eigenvalues failed to converge");
  return es.eigenvalues();
}

Mat project_psd(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  if (es.info() != Eigen::Success) throw std::runtime_error("project_psd failed to converge");
  RVec lam = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

RMat project_psd(const RMat& a) {
  Eigen::SelfAdjointEigenSolver<RMat> es(a);
  if (es.info() != Eigen::Success) throw std::runtime_error("project_psd failed to converge");
  RVec lam = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

Mat sqrt_psd(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  if (es.info() != Eigen::Success) throw std::runtime_error("sqrt_psd failed to converge");
  RVec lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

RMat sqrt_psd(const RMat& a) {
  Eigen::SelfAdjointEigenSolver<RMat> es(a);
  if (es.info() != Eigen::Success) throw std::runtime_error("sqrt_psd failed to converge");
  RVec lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

double min_eigenvalue(const Mat& a) { return hermitian_eigenvalues(a)(0); }

double operator_norm(const Mat& a) {
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

double trace_norm(const Mat& a) {
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues().sum();
}

}  // namespace qot
