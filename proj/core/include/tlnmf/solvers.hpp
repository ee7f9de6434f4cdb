#pragma once

#include "tlnmf/nmf_mu.hpp"
#include "tlnmf/objectives.hpp"
#include "tlnmf/qn.hpp"
#include "tlnmf/types.hpp"

#include <functional>
#include <vector>

namespace tlnmf {

/// A feasible starting point: Phi0 in O(M), (W0, H0) in F_K.
struct Init {
  OrthogonalTransform phi;
  NmfFactors factors;
};

/// Phi0 = polar projection of a standard Gaussian matrix (column-major
/// draws), W0 = |N(0,1)| with l1-normalized columns, H0 = |N(0,1)| scaled so
/// that mean(W0 H0) = mean_power. Deterministic under fixed seed.
Init random_init(int M, int N, int K, std::uint64_t seed, double mean_power);

/// Seed of the p-th random initialization of a run seeded with `seed`
/// (kept on a stream separate from the data-realization seeds).
std::uint64_t init_seed(std::uint64_t seed, int p);

enum class TraceGranularity { kOuter, kSubstep };
enum class TracePhase : char { kInit = '0', kMu = 'M', kQn = 'Q' };

struct TracePoint {
  int outer;
  TracePhase phase;
  double C, L, I;
};

struct SolveResult {
  OrthogonalTransform phi;
  NmfFactors factors;
  std::vector<TracePoint> trace;
  int init_id;
};

struct SolveOptions {
  TraceGranularity granularity = TraceGranularity::kOuter;
  MuVariant variant = MuVariant::kObjectiveConsistent;
  int init_id = 0;
  // Invoked after every QN iteration of the JD phase (complexity experiment).
  std::function<void(int, const OrthogonalTransform&)> qn_snapshot;
};

/// Alternating solver: J outer iterations, each running J_NMF multiplicative
/// sweeps on C_S(Phi_j, ., .) followed by J_TL quasi-Newton steps on
/// C_S(., W, H) with the exponential-map retraction.
SolveResult tlnmf_solve(const DataContext& ctx, const SolverConfig& cfg, const Init& init,
                        const SolveOptions& options = {});
SolveResult tlnmf_solve(const RealizationSet& data, const SolverConfig& cfg, const Init& init,
                        const SolveOptions& options = {});

/// Two-step solver: J*J_TL quasi-Newton steps on L_S with the projection
/// retraction, then J*J_NMF multiplicative sweeps on I_S(Phi_J, ., .).
SolveResult jdnmf_solve(const DataContext& ctx, const SolverConfig& cfg, const Init& init,
                        const SolveOptions& options = {});
SolveResult jdnmf_solve(const RealizationSet& data, const SolverConfig& cfg, const Init& init,
                        const SolveOptions& options = {});

struct FinalObjectives {
  int init_id;
  double C, L, I;
};

struct MultiInitReport {
  SolveResult best_tlnmf;
  SolveResult best_jdnmf;
  std::vector<FinalObjectives> tlnmf_candidates;
  std::vector<FinalObjectives> jdnmf_candidates;
};

/// P random initializations, both solvers run from each, then each solver's
/// P final triples feed the other solver as P extra initializations. TL-NMF
/// keeps the candidate with smallest C_S over the 2P pool. JD+NMF keeps the
/// Phi with smallest L_S, re-minimizes I_S(Phi, ., .) from all 2P factor
/// initializations, and keeps the best I_S. Ties break on lowest init_id.
MultiInitReport multi_init(const RealizationSet& data, const SolverConfig& cfg,
                           MuVariant variant = MuVariant::kObjectiveConsistent,
                           int threads = 1);

}  // namespace tlnmf
