#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tlnmf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Thrown when a caller violates a documented precondition.
class ContractViolation : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Thrown on invalid dimensions / parameter values (CLI exit code 2).
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Thrown when a matrix is (numerically) singular where it must not be.
class SingularityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Thrown when a NaN/Inf is detected in an objective (CLI exit code 3).
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// S i.i.d. realizations of an M x N data matrix. Realization s is stored as
/// the column block [s*N, (s+1)*N) of a single M x (N*S) matrix, which keeps
/// the hot per-iteration products as one large GEMM.
class RealizationSet {
public:
  RealizationSet(Matrix stacked, int n_frames, int n_realizations);
  explicit RealizationSet(const std::vector<Matrix>& realizations);

  int M() const { return static_cast<int>(stacked_.rows()); }
  int N() const { return N_; }
  int S() const { return S_; }

  const Matrix& stacked() const { return stacked_; }
  Eigen::Block<const Matrix> realization(int s) const {
    return stacked_.block(0, static_cast<Eigen::Index>(s) * N_, stacked_.rows(), N_);
  }

private:
  Matrix stacked_;  // M x (N*S)
  int N_ = 0;
  int S_ = 0;
};

/// An M x M matrix constrained to the orthogonal group O(M).
/// ||Phi^T Phi - I||_max <= 1e-8 is checked on construction.
class OrthogonalTransform {
public:
  static constexpr double kOrthoTol = 1e-8;

  explicit OrthogonalTransform(Matrix phi);
  static OrthogonalTransform identity(int m);

  const Matrix& mat() const { return mat_; }
  int size() const { return static_cast<int>(mat_.rows()); }
  double orthogonality_error() const;

private:
  Matrix mat_;
};

/// Nonnegative factor pair (W, H) under the F_K constraint: every column of
/// W sums to one (scale ambiguity removal).
struct NmfFactors {
  Matrix W;  // M x K, nonnegative, unit l1 columns
  Matrix H;  // K x N, nonnegative

  int K() const { return static_cast<int>(W.cols()); }

  // Throws ContractViolation if (W, H) is not in F_K within tol.
  void require_feasible(double tol = 1e-12) const;
};

/// N per-column empirical covariance matrices.
struct CovarianceStack {
  std::vector<Matrix> sigmas;

  int N() const { return static_cast<int>(sigmas.size()); }
  int M() const { return sigmas.empty() ? 0 : static_cast<int>(sigmas.front().rows()); }

  // Symmetry within 1e-10 and min eigenvalue >= -1e-10 * ||Sigma||.
  void validate() const;
};

/// Ground truth (Phi_bar, W_bar, H_bar) and the true covariances Sigma_n of a
/// synthetic model satisfying the moment conditions.
struct GroundTruth {
  OrthogonalTransform phi_bar;
  Matrix w_bar;                     // M x K_bar, positive
  Matrix h_bar;                     // K_bar x N, positive
  std::vector<Matrix> sigmas_true;  // N symmetric PD matrices

  int K_bar() const { return static_cast<int>(w_bar.cols()); }

  // Checks [W_bar H_bar] > 0 and the diagonality of Phi_bar Sigma_n Phi_bar^T
  // with diagonal W_bar h_n, within 1e-10.
  void validate() const;
};

/// Algorithm parameters (Table-of-experiments layout: K, eps0, iteration
/// counts, number of random initializations, RNG seed).
struct SolverConfig {
  int K = 5;
  double eps0 = 1e-8;
  int J = 1000;
  int J_TL = 1;
  int J_NMF = 10;
  int P = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

inline void check_finite(double value, const std::string& what) {
  if (!std::isfinite(value)) throw NumericalError(what + " is not finite");
}

}  // namespace tlnmf
