#include "tlnmf/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace tlnmf {

OrthogonalTransform matrix_exp_antisym(const Matrix& E) {
  if (E.rows() != E.cols()) throw ContractViolation("matrix_exp_antisym: E must be square");
  const double antisym_err = (E + E.transpose()).cwiseAbs().maxCoeff();
  if (antisym_err > 1e-10)
    throw ContractViolation("matrix_exp_antisym: ||E + E^T||_max = " +
                            std::to_string(antisym_err));
  return OrthogonalTransform(E.exp());
}

OrthogonalTransform polar_project(const Matrix& A) {
  if (A.rows() != A.cols()) throw ContractViolation("polar_project: A must be square");
  Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (!(sv(sv.size() - 1) > 1e-12 * sv(0)))
    throw SingularityError("polar_project: rank-deficient input, projection not unique");
  return OrthogonalTransform(svd.matrixU() * svd.matrixV().transpose());
}

Matrix sym_inv_sqrt(const Matrix& S) {
  if (S.rows() != S.cols()) throw ContractViolation("sym_inv_sqrt: S must be square");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(S);
  if (!(eig.eigenvalues().minCoeff() > 0.0))
    throw SingularityError("sym_inv_sqrt: input is not positive definite");
  return eig.eigenvectors() *
         eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
         eig.eigenvectors().transpose();
}

double digamma(double x) {
  if (!(x > 0.0)) throw ContractViolation("digamma: x > 0 required");
  double acc = 0.0;
  while (x < 8.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  // Asymptotic expansion; with x >= 8 the truncation error is below 1e-13.
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series = inv2 * (1.0 / 12.0 -
                        inv2 * (1.0 / 120.0 -
                        inv2 * (1.0 / 252.0 -
                        inv2 * (1.0 / 240.0 -
                        inv2 * (1.0 / 132.0 -
                        inv2 * (691.0 / 32760.0 -
                        inv2 * (1.0 / 12.0)))))));
  return acc + std::log(x) - 0.5 * inv - series;
}

}  // namespace tlnmf
