#include "tlnmf/types.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace tlnmf {

RealizationSet::RealizationSet(Matrix stacked, int n_frames, int n_realizations)
    : stacked_(std::move(stacked)), N_(n_frames), S_(n_realizations) {
  if (S_ < 1 || N_ < 1 || stacked_.rows() < 2)
    throw ConfigError("RealizationSet: need S >= 1, N >= 1, M >= 2");
  if (stacked_.cols() != static_cast<Eigen::Index>(N_) * S_)
    throw ConfigError("RealizationSet: stacked matrix must be M x (N*S)");
}

RealizationSet::RealizationSet(const std::vector<Matrix>& realizations)
    : N_(0), S_(static_cast<int>(realizations.size())) {
  if (realizations.empty()) throw ConfigError("RealizationSet: S >= 1 required");
  const Eigen::Index m = realizations.front().rows();
  const Eigen::Index n = realizations.front().cols();
  for (const Matrix& y : realizations)
    if (y.rows() != m || y.cols() != n)
      throw ConfigError("RealizationSet: all realizations must share shape M x N");
  N_ = static_cast<int>(n);
  stacked_.resize(m, n * S_);
  for (int s = 0; s < S_; ++s) stacked_.block(0, s * n, m, n) = realizations[s];
  if (S_ < 1 || N_ < 1 || m < 2)
    throw ConfigError("RealizationSet: need S >= 1, N >= 1, M >= 2");
}

OrthogonalTransform::OrthogonalTransform(Matrix phi) : mat_(std::move(phi)) {
  if (mat_.rows() != mat_.cols())
    throw ContractViolation("OrthogonalTransform: matrix must be square");
  const double err = (mat_.transpose() * mat_ - Matrix::Identity(mat_.rows(), mat_.cols()))
                         .cwiseAbs()
                         .maxCoeff();
  if (!(err <= kOrthoTol))
    throw ContractViolation("OrthogonalTransform: ||Phi^T Phi - I||_max = " +
                            std::to_string(err) + " exceeds 1e-8");
}

OrthogonalTransform OrthogonalTransform::identity(int m) {
  return OrthogonalTransform(Matrix::Identity(m, m));
}

double OrthogonalTransform::orthogonality_error() const {
  return (mat_.transpose() * mat_ - Matrix::Identity(mat_.rows(), mat_.cols()))
      .cwiseAbs()
      .maxCoeff();
}

void NmfFactors::require_feasible(double tol) const {
  if (W.cols() != H.rows())
    throw ContractViolation("NmfFactors: inner dimensions of W and H disagree");
  if ((W.array() < 0.0).any() || (H.array() < 0.0).any())
    throw ContractViolation("NmfFactors: negative entry");
  for (Eigen::Index k = 0; k < W.cols(); ++k) {
    const double colsum = W.col(k).sum();
    if (std::abs(colsum - 1.0) > tol)
      throw ContractViolation("NmfFactors: column " + std::to_string(k) +
                              " of W sums to " + std::to_string(colsum));
  }
}

void CovarianceStack::validate() const {
  for (const Matrix& sigma : sigmas) {
    const double sym_err = (sigma - sigma.transpose()).cwiseAbs().maxCoeff();
    if (sym_err > 1e-10)
      throw ContractViolation("CovarianceStack: symmetry error " + std::to_string(sym_err));
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma, Eigen::EigenvaluesOnly);
    const double scale = eig.eigenvalues().cwiseAbs().maxCoeff();
    if (eig.eigenvalues().minCoeff() < -1e-10 * scale)
      throw ContractViolation("CovarianceStack: matrix is not positive semi-definite");
  }
}

void GroundTruth::validate() const {
  const Matrix v_bar = w_bar * h_bar;
  if ((v_bar.array() <= 0.0).any())
    throw ContractViolation("GroundTruth: [W_bar H_bar] must be positive everywhere");
  const Matrix& phi = phi_bar.mat();
  for (int n = 0; n < static_cast<int>(sigmas_true.size()); ++n) {
    const Matrix t = phi * sigmas_true[n] * phi.transpose();
    Matrix expected = Matrix::Zero(t.rows(), t.cols());
    expected.diagonal() = v_bar.col(n);
    if ((t - expected).cwiseAbs().maxCoeff() > 1e-10)
      throw ContractViolation("GroundTruth: Phi_bar Sigma_n Phi_bar^T is not Diag(W_bar h_n)");
  }
}

void SolverConfig::validate() const {
  if (K < 1) throw ConfigError("SolverConfig: K >= 1 required");
  if (!(eps0 > 0.0)) throw ConfigError("SolverConfig: eps0 > 0 required");
  if (J < 0 || J_TL < 1 || J_NMF < 1)
    throw ConfigError("SolverConfig: iteration counts must be >= 1 (J >= 0)");
  if (P < 1) throw ConfigError("SolverConfig: P >= 1 required");
}

}  // namespace tlnmf
