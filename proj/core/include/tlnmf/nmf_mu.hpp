#pragma once

#include "tlnmf/objectives.hpp"
#include "tlnmf/types.hpp"

namespace tlnmf {

/// Numerator choice of the multiplicative updates. The objective-consistent
/// variant fits V + eps0 (the exact majorization target of the regularized
/// divergence, hence monotone); the verbatim variant fits V as the update is
/// usually written. With eps0 <= 1e-7 the two are numerically close.
enum class MuVariant { kObjectiveConsistent, kVerbatim };

struct MuStats {
  int zero_column_resets = 0;
};

/// One full sweep of multiplicative updates on the regularized IS objective:
/// update H, recompute the model, update W, then renormalize each W column
/// to unit l1 (moving the scale into the matching H row). Entries facing a
/// zero denominator are left unchanged; a W column that collapses to zero is
/// reset to the uniform column with its H row zeroed (reported via stats).
NmfFactors mu_sweep(const PowerMatrix& V, const NmfFactors& factors, double eps0,
                    MuVariant variant = MuVariant::kObjectiveConsistent,
                    MuStats* stats = nullptr);

/// j_nmf sweeps of mu_sweep.
NmfFactors mu_run(const PowerMatrix& V, const NmfFactors& factors, double eps0, int j_nmf,
                  MuVariant variant = MuVariant::kObjectiveConsistent,
                  MuStats* stats = nullptr);

}  // namespace tlnmf
