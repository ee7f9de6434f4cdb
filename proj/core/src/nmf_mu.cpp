#include "tlnmf/nmf_mu.hpp"

namespace tlnmf {

namespace {

// target = V + eps0 (objective-consistent) or V (verbatim)
Matrix update_target(const Matrix& V, double eps0, MuVariant variant) {
  if (variant == MuVariant::kObjectiveConsistent) return V.array() + eps0;
  return V;
}

// out = factor o (num / den), entries with den == 0 kept unchanged
void ratio_update(Matrix& factor, const Matrix& num, const Matrix& den) {
  for (Eigen::Index j = 0; j < factor.cols(); ++j)
    for (Eigen::Index i = 0; i < factor.rows(); ++i)
      if (den(i, j) > 0.0) factor(i, j) *= num(i, j) / den(i, j);
}

}  // namespace

NmfFactors mu_sweep(const PowerMatrix& V, const NmfFactors& factors, double eps0,
                    MuVariant variant, MuStats* stats) {
  if (!(eps0 > 0.0)) throw ConfigError("mu_sweep: eps0 > 0 required");
  if (factors.W.rows() != V.V.rows() || factors.H.cols() != V.V.cols())
    throw ContractViolation("mu_sweep: factor dimensions disagree with V");
  factors.require_feasible();

  const Matrix target = update_target(V.V, eps0, variant);
  NmfFactors f = factors;

  Matrix vhat = (f.W * f.H).array() + eps0;
  Matrix a = target.cwiseQuotient(vhat.cwiseAbs2());
  Matrix b = vhat.cwiseInverse();
  ratio_update(f.H, f.W.transpose() * a, f.W.transpose() * b);

  vhat = (f.W * f.H).array() + eps0;
  a = target.cwiseQuotient(vhat.cwiseAbs2());
  b = vhat.cwiseInverse();
  ratio_update(f.W, a * f.H.transpose(), b * f.H.transpose());

  for (Eigen::Index k = 0; k < f.W.cols(); ++k) {
    const double scale = f.W.col(k).sum();
    if (scale > 0.0) {
      f.W.col(k) /= scale;
      f.H.row(k) *= scale;
    } else {
      f.W.col(k).setConstant(1.0 / f.W.rows());
      f.H.row(k).setZero();
      if (stats) ++stats->zero_column_resets;
    }
  }
  return f;
}

NmfFactors mu_run(const PowerMatrix& V, const NmfFactors& factors, double eps0, int j_nmf,
                  MuVariant variant, MuStats* stats) {
  NmfFactors f = factors;
  for (int j = 0; j < j_nmf; ++j) f = mu_sweep(V, f, eps0, variant, stats);
  return f;
}

}  // namespace tlnmf
