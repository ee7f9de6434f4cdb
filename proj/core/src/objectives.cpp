#include "tlnmf/objectives.hpp"

#include "tlnmf/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace tlnmf {

namespace detail {

Matrix power_from_stacked(const Matrix& X, int N, int S) {
  Matrix V = Matrix::Zero(X.rows(), N);
  for (int s = 0; s < S; ++s)
    V.noalias() += X.block(0, static_cast<Eigen::Index>(s) * N, X.rows(), N).cwiseAbs2();
  V /= static_cast<double>(S);
  return V;
}

std::vector<Matrix> transform_stack(const Matrix& phi, const std::vector<Matrix>& sigmas) {
  std::vector<Matrix> t(sigmas.size());
  Matrix b(phi.rows(), phi.cols());
  for (std::size_t n = 0; n < sigmas.size(); ++n) {
    b.noalias() = phi * sigmas[n];
    t[n].noalias() = b * phi.transpose();
  }
  return t;
}

Matrix diag_of_transform_stack(const Matrix& phi, const std::vector<Matrix>& sigmas) {
  const Eigen::Index m = phi.rows();
  Matrix v(m, static_cast<Eigen::Index>(sigmas.size()));
  Matrix b(m, m);
  for (std::size_t n = 0; n < sigmas.size(); ++n) {
    b.noalias() = phi * sigmas[n];
    v.col(static_cast<Eigen::Index>(n)) = (b.cwiseProduct(phi)).rowwise().sum();
  }
  return v;
}

double is_div_sum(const Matrix& A, const Matrix& B, double eps0) {
  CompensatedSum sum;
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      const double r = (A(i, j) + eps0) / (B(i, j) + eps0);
      sum.add(r - std::log(r) - 1.0);
    }
  return sum.value();
}

ObjectiveTriple objectives_from_power(const Matrix& V, const NmfFactors& factors,
                                      double eps0) {
  const Matrix WH = factors.W * factors.H;
  ObjectiveTriple t{};
  CompensatedSum l, c;
  for (Eigen::Index j = 0; j < V.cols(); ++j)
    for (Eigen::Index i = 0; i < V.rows(); ++i) {
      const double model = WH(i, j) + eps0;
      l.add(std::log(V(i, j) + eps0));
      c.add((V(i, j) + eps0) / model + std::log(model));
    }
  t.L = static_cast<double>(V.rows()) * V.cols() + l.value();
  t.I = is_div_sum(V, WH, eps0);
  t.C = c.value();
  return t;
}

}  // namespace detail

PowerMatrix empirical_power(const OrthogonalTransform& phi, const RealizationSet& data) {
  if (phi.size() != data.M())
    throw ContractViolation("empirical_power: Phi is " + std::to_string(phi.size()) +
                            "x" + std::to_string(phi.size()) + " but data has M = " +
                            std::to_string(data.M()));
  const Matrix X = phi.mat() * data.stacked();
  return PowerMatrix{detail::power_from_stacked(X, data.N(), data.S())};
}

CovarianceStack covariance_stack(const RealizationSet& data, double eps0) {
  if (eps0 < 0.0) throw ConfigError("covariance_stack: eps0 >= 0 required");
  const int M = data.M(), N = data.N(), S = data.S();
  CovarianceStack cov;
  cov.sigmas.assign(N, Matrix::Zero(M, M));
  for (int s = 0; s < S; ++s) {
    const auto y = data.realization(s);
    for (int n = 0; n < N; ++n)
      cov.sigmas[n].noalias() += y.col(n) * y.col(n).transpose();
  }
  for (int n = 0; n < N; ++n) {
    cov.sigmas[n] /= static_cast<double>(S);
    cov.sigmas[n].diagonal().array() += eps0;
  }
  return cov;
}

double is_div_reg(const Matrix& A, const Matrix& B, double eps0) {
  if (A.rows() != B.rows() || A.cols() != B.cols())
    throw ContractViolation("is_div_reg: shape mismatch");
  if (!(eps0 > 0.0)) throw ConfigError("is_div_reg: eps0 > 0 required");
  return detail::is_div_sum(A, B, eps0);
}

double objective_I(const OrthogonalTransform& phi, const NmfFactors& factors,
                   const RealizationSet& data, double eps0) {
  if (factors.W.rows() != data.M() || factors.H.cols() != data.N())
    throw ContractViolation("objective_I: factor dimensions disagree with data");
  const Matrix V = empirical_power(phi, data).V;
  const Matrix WH = factors.W * factors.H;
  const double value = detail::is_div_sum(V, WH, eps0);
  check_finite(value, "I_S");
  return value;
}

double objective_L(const OrthogonalTransform& phi, const RealizationSet& data, double eps0) {
  const Matrix V = empirical_power(phi, data).V;
  detail::CompensatedSum sum;
  for (Eigen::Index j = 0; j < V.cols(); ++j)
    for (Eigen::Index i = 0; i < V.rows(); ++i) sum.add(std::log(V(i, j) + eps0));
  const double value = static_cast<double>(data.M()) * data.N() + sum.value();
  check_finite(value, "L_S");
  return value;
}

double objective_L_jd(const OrthogonalTransform& phi, const CovarianceStack& cov) {
  if (cov.M() != phi.size())
    throw ContractViolation("objective_L_jd: stack dimension disagrees with Phi");
  const Matrix diag = detail::diag_of_transform_stack(phi.mat(), cov.sigmas);
  detail::CompensatedSum sum;
  for (Eigen::Index j = 0; j < diag.cols(); ++j)
    for (Eigen::Index i = 0; i < diag.rows(); ++i) {
      if (!(diag(i, j) > 0.0))
        throw NumericalError("objective_L_jd: nonpositive diagonal entry, corrupted stack");
      sum.add(std::log(diag(i, j)));
    }
  const double value = static_cast<double>(phi.size()) * cov.N() + sum.value();
  check_finite(value, "L_S (JD form)");
  return value;
}

double objective_C(const OrthogonalTransform& phi, const NmfFactors& factors,
                   const RealizationSet& data, double eps0) {
  if (factors.W.rows() != data.M() || factors.H.cols() != data.N())
    throw ContractViolation("objective_C: factor dimensions disagree with data");
  const Matrix V = empirical_power(phi, data).V;
  const Matrix WH = factors.W * factors.H;
  detail::CompensatedSum sum;
  for (Eigen::Index j = 0; j < V.cols(); ++j)
    for (Eigen::Index i = 0; i < V.rows(); ++i) {
      const double model = WH(i, j) + eps0;
      sum.add((V(i, j) + eps0) / model + std::log(model));
    }
  check_finite(sum.value(), "C_S");
  return sum.value();
}

Matrix true_power(const OrthogonalTransform& phi, const GroundTruth& truth) {
  return detail::diag_of_transform_stack(phi.mat(), truth.sigmas_true);
}

double q_s(const OrthogonalTransform& phi, const RealizationSet& data,
           const GroundTruth& truth, double eps0) {
  const Matrix V = empirical_power(phi, data).V;
  const double value = detail::is_div_sum(V, true_power(phi, truth), eps0);
  check_finite(value, "Q_S");
  return value;
}

NmfFactors exact_oracle_factors(const OrthogonalTransform& phi, const GroundTruth& truth,
                                int K) {
  const int K_bar = truth.K_bar();
  if (K < K_bar) throw ConfigError("exact_oracle_factors: K >= K_bar required");
  const int M = phi.size();
  const int N = static_cast<int>(truth.h_bar.cols());
  const Matrix D2 = (phi.mat() * truth.phi_bar.mat().transpose()).cwiseAbs2();

  NmfFactors f;
  f.W = Matrix::Constant(M, K, 1.0 / M);
  f.H = Matrix::Zero(K, N);
  for (int k = 0; k < K_bar; ++k) {
    const double wk_norm = truth.w_bar.col(k).sum();
    f.W.col(k).noalias() = D2 * (truth.w_bar.col(k) / wk_norm);
    f.H.row(k) = truth.h_bar.row(k) * wk_norm;
  }
  // Columns of D2 sum to one only up to the orthogonality error of Phi;
  // rescale each (w_k, h_k) pair to land exactly in F_K without changing WH.
  for (int k = 0; k < K_bar; ++k) {
    const double colsum = f.W.col(k).sum();
    f.W.col(k) /= colsum;
    f.H.row(k) *= colsum;
  }
  return f;
}

double u_s_bound(const RealizationSet& data, const GroundTruth& truth) {
  const CovarianceStack emp = covariance_stack(data, 0.0);
  double worst = 0.0;
  for (int n = 0; n < data.N(); ++n) {
    const Matrix w = sym_inv_sqrt(truth.sigmas_true[n]);
    const Matrix centered = w * emp.sigmas[n] * w - Matrix::Identity(data.M(), data.M());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(centered, Eigen::EigenvaluesOnly);
    worst = std::max(worst, eig.eigenvalues().cwiseAbs().maxCoeff());
  }
  return worst;
}

double h_s(int M, int S, double t) {
  return 3.0 * (std::sqrt(static_cast<double>(M)) + t) / std::sqrt(static_cast<double>(S));
}

DataContext::DataContext(const RealizationSet& data) : data_(data) {
  mean_power_ = data.stacked().squaredNorm() /
                (static_cast<double>(data.M()) * data.N() * data.S());
  if (data.S() > data.M()) {
    const CovarianceStack cov = covariance_stack(data, 0.0);
    sigma_ = cov.sigmas;
  }
}

Matrix DataContext::power(const Matrix& phi) const {
  if (has_cov()) return detail::diag_of_transform_stack(phi, sigma_);
  const Matrix X = phi * data_.stacked();
  return detail::power_from_stacked(X, data_.N(), data_.S());
}

double DataContext::objective_L(const Matrix& phi, double eps0) const {
  const Matrix V = power(phi);
  detail::CompensatedSum sum;
  for (Eigen::Index j = 0; j < V.cols(); ++j)
    for (Eigen::Index i = 0; i < V.rows(); ++i) sum.add(std::log(V(i, j) + eps0));
  return static_cast<double>(M()) * N() + sum.value();
}

}  // namespace tlnmf
