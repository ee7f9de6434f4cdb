#pragma once

#include "tlnmf/objectives.hpp"
#include "tlnmf/types.hpp"

#include <functional>

namespace tlnmf {

/// Gradient of C_S(., W, H) composed with the exponential-map retraction,
/// at 0: G_{ab} = (2/S) sum_{n,s} X_{an} X_{bn} / ([WH]_{an} + eps0) with
/// X^(s) = Phi Y^(s).
Matrix tlnmf_gradient(const OrthogonalTransform& phi, const RealizationSet& data,
                      const NmfFactors& factors, double eps0);

/// Diagonal Hessian approximation coefficients for the same local model:
/// Gamma_{ab} = (2/S) sum_{n,s} X_{bn}^2 / ([WH]_{an} + eps0).
Matrix tlnmf_gamma(const OrthogonalTransform& phi, const RealizationSet& data,
                   const NmfFactors& factors, double eps0);

/// Closed-form minimizer of the quadratic model over antisymmetric E:
/// E_{ab} = -G^anti_{ab} / Gamma^sym_{ab}, zero where Gamma^sym vanishes.
Matrix tlnmf_direction(const Matrix& G, const Matrix& Gamma);

/// Gradient of L_S composed with the projection retraction, at 0:
/// G_{ab} = (1/N) sum_n ( T_n[ab]/T_n[aa] - delta_ab ), T_n = Phi Sigma~_n Phi^T.
Matrix jd_gradient(const OrthogonalTransform& phi, const CovarianceStack& cov);

/// Gamma_{ab} = (1/N) sum_n T_n[bb]/T_n[aa].
Matrix jd_gamma(const OrthogonalTransform& phi, const CovarianceStack& cov);

/// E_{ab} = -G^anti_{ab} / (Gamma^sym_{ab} - 1), zero where Gamma^sym = 1.
Matrix jd_direction(const Matrix& G, const Matrix& Gamma);

using Objective = std::function<double(const OrthogonalTransform&)>;
using Retraction = std::function<OrthogonalTransform(const OrthogonalTransform&, const Matrix&)>;

/// rho_Phi(E) = exp(E) Phi.
OrthogonalTransform retract_exp(const OrthogonalTransform& phi, const Matrix& E);

/// rho_Phi(E) = pi(Phi + E Phi), pi the polar projection onto O(M).
OrthogonalTransform retract_projection(const OrthogonalTransform& phi, const Matrix& E);

struct LineSearchOutcome {
  bool stalled;
  double eta;
  OrthogonalTransform phi;  // accepted point; equals the input Phi on stall
  double value;             // g at phi
};

/// Backtracking from eta = 1: returns the largest eta in {1, 1/2, ..., 2^-30}
/// with g(rho_Phi(eta E)) < g(Phi). Stall (E = 0 or no step qualifies) is a
/// value, not an error; the caller keeps Phi.
LineSearchOutcome line_search(const Objective& g, const OrthogonalTransform& phi,
                              double g_phi, const Matrix& E, const Retraction& retraction,
                              int max_halvings = 30);
LineSearchOutcome line_search(const Objective& g, const OrthogonalTransform& phi,
                              const Matrix& E, const Retraction& retraction,
                              int max_halvings = 30);

struct QnStep {
  Matrix G;  // gradient of g o rho_Phi at 0
  Matrix E;  // antisymmetric quasi-Newton direction
};
using StepProvider = std::function<QnStep(const OrthogonalTransform&)>;

/// Called after every iteration with the (possibly unchanged) iterate and its
/// objective value.
using QnCallback = std::function<void(int iter, const OrthogonalTransform& phi, double g)>;

/// Generic quasi-Newton descent over O(M): per iteration, query the step
/// provider, line-search along the retracted direction, keep Phi on stall.
/// Once a step stalls the remaining iterations would repeat the identical
/// computation, so they are reported without being re-run.
OrthogonalTransform qn_minimize(const Objective& g, const StepProvider& provider,
                                const OrthogonalTransform& phi0, int iterations,
                                const Retraction& retraction, const QnCallback& callback = {});

}  // namespace tlnmf
