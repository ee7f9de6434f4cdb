#pragma once

#include "tlnmf/datagen.hpp"
#include "tlnmf/solvers.hpp"

#include <filesystem>
#include <variant>
#include <vector>

namespace tlnmf {

using DatasetSpec = std::variant<GcmSpec, NotesSpec>;

/// Realizations at a given S. GCM keeps the ground truth fixed (drawn from
/// spec.seed) and re-samples realizations with an S-dependent noise stream;
/// the notes dataset re-synthesizes from per-realization phase seeds.
RealizationSet dataset_at(const DatasetSpec& spec, int S);

/// Ground truth of the GCM member of a DatasetSpec.
GroundTruth dataset_truth(const GcmSpec& spec);

// ------------------------------------------------------------ gap decay ---

struct GapRow {
  int S;
  double I_star, I_dot, gap;
  double C_star, C_dot, L_star, L_dot;
  std::uint64_t seed;
};

struct GapExperiment {
  std::vector<GapRow> rows;
  double slope_I_star;  // log-log LS slope over S >= 10
  double slope_gap;     // NaN when no positive gaps in the window
};

GapExperiment run_gap(const DatasetSpec& dataset, const std::vector<int>& S_grid,
                      const SolverConfig& cfg, int threads = 1);

// ------------------------------------------------------- atoms / Table II ---

struct HarmonicFit {
  double f = 0.0;
  double a = 0.0;
  double theta = 0.0;
  double error = 0.0;
  bool degenerate = false;
};

/// Nonlinear least squares of atom[t] ~ a cos(2 pi (f/f0) t + theta),
/// t = 0..M-1: a coarse frequency grid with step f0/(20 M) (the amplitude and
/// phase are linear least squares per frequency), then golden-section
/// refinement of f to 1e-3 Hz. A zero atom is flagged degenerate.
HarmonicFit harmonic_regression(const Vector& atom, double f0);

struct SolverAtoms {
  Matrix atoms;                // top_k x M, most significant first
  std::vector<int> atom_rows;  // row indices into the learned Phi
  Matrix W, H;
  std::vector<HarmonicFit> fits;
};

struct AtomsExperiment {
  SolverAtoms tlnmf;
  SolverAtoms jdnmf;
};

/// Runs both solvers (multi-initialization) on the notes dataset and ranks
/// the rows phi_k of each learned transform by E_S ||phi_k Y||_2^2.
AtomsExperiment run_atoms(const NotesSpec& spec, const SolverConfig& cfg, int threads = 1,
                          int top_k = 8);

// ------------------------------------------------------------ complexity ---

struct ComplexityRow {
  int J;
  double C_tlnmf, C_jdnmf;
};

/// Matched-budget comparison from one shared random init: TL-NMF after J
/// outer iterations vs JD+NMF after J*J_TL QN updates plus J*J_NMF MU
/// updates, for each J in the grid.
std::vector<ComplexityRow> run_complexity(const DatasetSpec& dataset, const SolverConfig& cfg,
                                          const std::vector<int>& J_grid);

// ------------------------------------------------------------------ rate ---

struct RateRow {
  int S;
  double mean_qs_per_entry;  // mean of Q_S(Phi_bar) / (MN) over trials
  double predicted;          // log S - psi(S/2) - log 2
  double bound;              // h_S^2 / (1 - h_S) at t = 3; NaN when h_S >= 1
};

struct RateExperiment {
  std::vector<RateRow> rows;
  std::vector<std::vector<double>> trial_qs;  // raw Q_S(Phi_bar) per (S, trial)
  double t = 3.0;
};

RateExperiment run_rate(const GcmSpec& base, const std::vector<int>& S_grid, int trials,
                        double eps0 = 1e-12, double t = 3.0, int threads = 1);

// ------------------------------------------------------------- CSV output ---

void write_gap_csv(const std::filesystem::path& dir, const GapExperiment& gap);
void write_atoms_csv(const std::filesystem::path& dir, const AtomsExperiment& atoms);
void write_complexity_csv(const std::filesystem::path& dir,
                          const std::vector<ComplexityRow>& rows);
void write_rate_csv(const std::filesystem::path& dir, const RateExperiment& rate);
void write_solve_result_csv(const std::filesystem::path& dir, const SolveResult& result);

}  // namespace tlnmf
