#pragma once

#include "tlnmf/types.hpp"

namespace tlnmf {

/// Empirical power E_S(|Phi Y|^{o2}), nonnegative M x N.
struct PowerMatrix {
  Matrix V;
};

/// V_{mn} = (1/S) sum_s [Phi Y^(s)]_{mn}^2.
PowerMatrix empirical_power(const OrthogonalTransform& phi, const RealizationSet& data);

/// Sigma_{n,S} = (1/S) sum_s y_n^(s) y_n^(s)^T + eps0 I, for every column n.
CovarianceStack covariance_stack(const RealizationSet& data, double eps0);

/// Regularized Itakura-Saito divergence
/// sum_{mn} [ (A+eps0)/(B+eps0) - log((A+eps0)/(B+eps0)) - 1 ].
double is_div_reg(const Matrix& A, const Matrix& B, double eps0);

/// I_S(Phi, W, H) = D_eps0(E_S(|Phi Y|^{o2}) | W H).
double objective_I(const OrthogonalTransform& phi, const NmfFactors& factors,
                   const RealizationSet& data, double eps0);

/// L_S(Phi) = MN + sum_{mn} log(V_{mn} + eps0).
double objective_L(const OrthogonalTransform& phi, const RealizationSet& data, double eps0);

/// L_S(Phi) = MN + sum_n log det Diag(Phi Sigma~_n Phi^T), taking the stack
/// matrices (already regularized by eps0) literally. Agrees with objective_L
/// when the stack was built with the same eps0.
double objective_L_jd(const OrthogonalTransform& phi, const CovarianceStack& cov);

/// C_S(Phi, W, H) = sum_{mn} (V+eps0)/([WH]+eps0) + log([WH]+eps0);
/// equals objective_L + objective_I.
double objective_C(const OrthogonalTransform& phi, const NmfFactors& factors,
                   const RealizationSet& data, double eps0);

/// True power of the model: [Phi Sigma_n Phi^T]_{mm}, M x N.
Matrix true_power(const OrthogonalTransform& phi, const GroundTruth& truth);

/// Q_S(Phi) = D_eps0(E_S(|Phi Y|^{o2}) | E(|Phi Y|^{o2})).
double q_s(const OrthogonalTransform& phi, const RealizationSet& data,
           const GroundTruth& truth, double eps0);

/// Exact factorization of the true power at Phi: with D = Phi Phi_bar^T,
/// [W*]_{mk} = sum_{m'} (w_bar_{m'k}/||w_bar_k||_1) d_{mm'}^2 for k <= K_bar
/// and 1/M above, [H*]_{kn} = h_bar_{kn} ||w_bar_k||_1 for k <= K_bar and 0
/// above. The result lies in F_K and satisfies W* H* = true_power(Phi).
NmfFactors exact_oracle_factors(const OrthogonalTransform& phi, const GroundTruth& truth,
                                int K);

/// max_n || Sigma_n^{-1/2} Sigma_{n,S} Sigma_n^{-1/2} - I ||_2 with the
/// empirical stack built at eps0 = 0.
double u_s_bound(const RealizationSet& data, const GroundTruth& truth);

/// h_S = 3 (sqrt(M) + t) / sqrt(S).
double h_s(int M, int S, double t);

namespace detail {

/// V from a stacked transform X = Phi * [Y^(1) ... Y^(S)]: the per-entry mean
/// of squares over realizations.
Matrix power_from_stacked(const Matrix& X, int N, int S);

/// T_n = Phi Sigma_n Phi^T for each matrix of the stack.
std::vector<Matrix> transform_stack(const Matrix& phi, const std::vector<Matrix>& sigmas);

/// diag(Phi Sigma_n Phi^T) for each n, as columns of an M x N matrix.
Matrix diag_of_transform_stack(const Matrix& phi, const std::vector<Matrix>& sigmas);

/// Compensated (Kahan) summation over an array expression.
class CompensatedSum {
public:
  void add(double x) {
    const double y = x - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

private:
  double s_ = 0.0;
  double c_ = 0.0;
};

double is_div_sum(const Matrix& A, const Matrix& B, double eps0);

struct ObjectiveTriple {
  double C, L, I;
};

/// (C_S, L_S, I_S) at a precomputed empirical power, each from its own
/// formula (the C = L + I identity is left as a checkable property).
ObjectiveTriple objectives_from_power(const Matrix& V, const NmfFactors& factors, double eps0);

}  // namespace detail

/// Read-only per-dataset cache shared by solvers and experiments. Builds the
/// raw covariance stack when S > M, where the per-iteration cost O(N M^3) of
/// the covariance route beats the O(S N M^2) of the stacked-realization
/// route; both routes evaluate the same quantities.
class DataContext {
public:
  explicit DataContext(const RealizationSet& data);

  const RealizationSet& data() const { return data_; }
  int M() const { return data_.M(); }
  int N() const { return data_.N(); }
  int S() const { return data_.S(); }
  bool has_cov() const { return !sigma_.empty(); }
  const std::vector<Matrix>& sigma() const { return sigma_; }
  double mean_power() const { return mean_power_; }

  Matrix power(const Matrix& phi) const;
  double objective_L(const Matrix& phi, double eps0) const;

private:
  const RealizationSet& data_;
  std::vector<Matrix> sigma_;  // raw Sigma_{n,S}, no eps0; present iff S > M
  double mean_power_ = 0.0;
};

}  // namespace tlnmf
