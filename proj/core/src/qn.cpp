#include "tlnmf/qn.hpp"

#include "tlnmf/linalg.hpp"

#include <cmath>

namespace tlnmf {

namespace {

constexpr double kDegenerateCell = 1e-14;

Matrix weights(const NmfFactors& factors, double eps0) {
  return ((factors.W * factors.H).array() + eps0).inverse();
}

}  // namespace

Matrix tlnmf_gradient(const OrthogonalTransform& phi, const RealizationSet& data,
                      const NmfFactors& factors, double eps0) {
  const int M = data.M(), N = data.N(), S = data.S();
  const Matrix X = phi.mat() * data.stacked();
  const Matrix P = weights(factors, eps0);  // M x N
  Matrix weighted(M, static_cast<Eigen::Index>(N) * S);
  for (int s = 0; s < S; ++s)
    weighted.block(0, static_cast<Eigen::Index>(s) * N, M, N) =
        P.cwiseProduct(X.block(0, static_cast<Eigen::Index>(s) * N, M, N));
  Matrix G(M, M);
  G.noalias() = weighted * X.transpose();
  G *= 2.0 / S;
  return G;
}

Matrix tlnmf_gamma(const OrthogonalTransform& phi, const RealizationSet& data,
                   const NmfFactors& factors, double eps0) {
  const Matrix V = empirical_power(phi, data).V;
  const Matrix P = weights(factors, eps0);
  return 2.0 * P * V.transpose();
}

Matrix tlnmf_direction(const Matrix& G, const Matrix& Gamma) {
  const Matrix g_anti = 0.5 * (G - G.transpose());
  const Matrix gamma_sym = 0.5 * (Gamma + Gamma.transpose());
  Matrix E = Matrix::Zero(G.rows(), G.cols());
  for (Eigen::Index j = 0; j < G.cols(); ++j)
    for (Eigen::Index i = 0; i < G.rows(); ++i)
      if (std::abs(gamma_sym(i, j)) > kDegenerateCell)
        E(i, j) = -g_anti(i, j) / gamma_sym(i, j);
  return E;
}

Matrix jd_gradient(const OrthogonalTransform& phi, const CovarianceStack& cov) {
  const int M = phi.size();
  const std::vector<Matrix> T = detail::transform_stack(phi.mat(), cov.sigmas);
  Matrix G = Matrix::Zero(M, M);
  for (const Matrix& t : T) {
    const Vector d = t.diagonal();
    G += t.cwiseQuotient(d.replicate(1, M));  // divide row a by T_n[aa]
  }
  G /= static_cast<double>(cov.N());
  G.diagonal().array() -= 1.0;
  return G;
}

Matrix jd_gamma(const OrthogonalTransform& phi, const CovarianceStack& cov) {
  const int M = phi.size();
  const std::vector<Matrix> T = detail::transform_stack(phi.mat(), cov.sigmas);
  Matrix Gamma = Matrix::Zero(M, M);
  for (const Matrix& t : T) {
    const Vector d = t.diagonal();
    Gamma += (d.transpose().replicate(M, 1)).cwiseQuotient(d.replicate(1, M));
  }
  Gamma /= static_cast<double>(cov.N());
  return Gamma;
}

Matrix jd_direction(const Matrix& G, const Matrix& Gamma) {
  const Matrix g_anti = 0.5 * (G - G.transpose());
  const Matrix gamma_sym = 0.5 * (Gamma + Gamma.transpose());
  Matrix E = Matrix::Zero(G.rows(), G.cols());
  for (Eigen::Index j = 0; j < G.cols(); ++j)
    for (Eigen::Index i = 0; i < G.rows(); ++i)
      if (std::abs(gamma_sym(i, j) - 1.0) > kDegenerateCell)
        E(i, j) = -g_anti(i, j) / (gamma_sym(i, j) - 1.0);
  return E;
}

namespace {

constexpr double kDriftTol = 1e-10;

OrthogonalTransform with_drift_fix(Matrix phi) {
  const double drift =
      (phi.transpose() * phi - Matrix::Identity(phi.rows(), phi.cols())).cwiseAbs().maxCoeff();
  if (drift > kDriftTol) return polar_project(phi);
  return OrthogonalTransform(std::move(phi));
}

}  // namespace

OrthogonalTransform retract_exp(const OrthogonalTransform& phi, const Matrix& E) {
  if (E.isZero(0.0)) return phi;
  return with_drift_fix(matrix_exp_antisym(E).mat() * phi.mat());
}

OrthogonalTransform retract_projection(const OrthogonalTransform& phi, const Matrix& E) {
  if (E.isZero(0.0)) return phi;
  const double antisym_err = (E + E.transpose()).cwiseAbs().maxCoeff();
  if (antisym_err > 1e-10 * (1.0 + E.cwiseAbs().maxCoeff()))
    throw ContractViolation("retract_projection: E must be antisymmetric");
  // pi(Phi + E Phi) = pi(I + E) Phi, and for antisymmetric E the polar factor
  // is (I + E)(I - E^2)^{-1/2}: (I+E)^T(I+E) = I - E^2 is symmetric positive
  // definite (E^2 has nonpositive spectrum), so the projection always exists
  // and needs one symmetric eigendecomposition instead of an SVD.
  const Eigen::Index m = E.rows();
  Matrix e2(m, m);
  e2.noalias() = E * E;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(Matrix::Identity(m, m) - e2);
  const Matrix inv_sqrt = eig.eigenvectors() *
                          eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                          eig.eigenvectors().transpose();
  Matrix polar(m, m);
  polar.noalias() = inv_sqrt + E * inv_sqrt;
  return with_drift_fix(polar * phi.mat());
}

LineSearchOutcome line_search(const Objective& g, const OrthogonalTransform& phi,
                              double g_phi, const Matrix& E, const Retraction& retraction,
                              int max_halvings) {
  LineSearchOutcome out{true, 0.0, phi, g_phi};
  if (E.isZero(0.0)) return out;
  double eta = 1.0;
  for (int k = 0; k <= max_halvings; ++k, eta *= 0.5) {
    OrthogonalTransform trial = retraction(phi, eta * E);
    const double value = g(trial);
    check_finite(value, "line search objective");
    if (value < g_phi) {
      out.stalled = false;
      out.eta = eta;
      out.phi = std::move(trial);
      out.value = value;
      return out;
    }
  }
  return out;
}

LineSearchOutcome line_search(const Objective& g, const OrthogonalTransform& phi,
                              const Matrix& E, const Retraction& retraction,
                              int max_halvings) {
  return line_search(g, phi, g(phi), E, retraction, max_halvings);
}

OrthogonalTransform qn_minimize(const Objective& g, const StepProvider& provider,
                                const OrthogonalTransform& phi0, int iterations,
                                const Retraction& retraction, const QnCallback& callback) {
  OrthogonalTransform phi = phi0;
  double value = iterations > 0 ? g(phi) : 0.0;
  for (int j = 0; j < iterations; ++j) {
    const QnStep step = provider(phi);
    const LineSearchOutcome out = line_search(g, phi, value, step.E, retraction);
    if (out.stalled) {
      // The state is unchanged, so every remaining iteration would stall too.
      if (callback)
        for (int r = j; r < iterations; ++r) callback(r, phi, value);
      return phi;
    }
    phi = out.phi;
    value = out.value;
    if (callback) callback(j, phi, value);
  }
  return phi;
}

}  // namespace tlnmf
