#include "tlnmf/experiments.hpp"

#include "tlnmf/csv.hpp"
#include "tlnmf/linalg.hpp"
#include "tlnmf/parallel.hpp"
#include "tlnmf/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tlnmf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Stream tags keeping experiment re-sampling separate from the base data and
// init streams.
constexpr std::uint64_t kGapNoiseTag = 0x44415441ULL;  // "DATA"
constexpr std::uint64_t kRateTag = 0x52415445ULL;      // "RATE"

double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 2) return kNaN;
  const double xm = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  const double ym = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - xm) * (y[i] - ym);
    den += (x[i] - xm) * (x[i] - xm);
  }
  return den > 0.0 ? num / den : kNaN;
}

}  // namespace

RealizationSet dataset_at(const DatasetSpec& spec, int S) {
  if (std::holds_alternative<GcmSpec>(spec)) {
    GcmSpec g = std::get<GcmSpec>(spec);
    const GroundTruth truth = dataset_truth(g);
    g.S = S;
    const std::uint64_t noise =
        split_seed(split_seed(g.seed, kGapNoiseTag), static_cast<std::uint64_t>(S));
    return gen_gcm_realizations(g, truth, noise);
  }
  NotesSpec n = std::get<NotesSpec>(spec);
  n.S = S;
  return gen_notes(n);
}

GroundTruth dataset_truth(const GcmSpec& spec) {
  GcmSpec g = spec;
  g.S = 1;
  return gen_gcm(g).second;
}

GapExperiment run_gap(const DatasetSpec& dataset, const std::vector<int>& S_grid,
                      const SolverConfig& cfg, int threads) {
  if (S_grid.empty()) throw ConfigError("run_gap: empty S grid");
  cfg.validate();

  GapExperiment out{{}, kNaN, kNaN};
  for (const int S : S_grid) {
    const RealizationSet data = dataset_at(dataset, S);
    const MultiInitReport rep =
        multi_init(data, cfg, MuVariant::kObjectiveConsistent, threads);

    const Matrix v_star = empirical_power(rep.best_tlnmf.phi, data).V;
    const Matrix v_dot = empirical_power(rep.best_jdnmf.phi, data).V;
    const auto star = detail::objectives_from_power(v_star, rep.best_tlnmf.factors, cfg.eps0);
    const auto dot = detail::objectives_from_power(v_dot, rep.best_jdnmf.factors, cfg.eps0);
    out.rows.push_back({S, star.I, dot.I, dot.I - star.I, star.C, dot.C, star.L, dot.L,
                        cfg.seed});
  }
  std::sort(out.rows.begin(), out.rows.end(),
            [](const GapRow& a, const GapRow& b) { return a.S < b.S; });

  // Slopes over the S >= 10 tail (S = 1 is pre-asymptotic).
  std::vector<double> xs, ys_star, xg, ys_gap;
  for (const GapRow& r : out.rows) {
    if (r.S < 10) continue;
    if (r.I_star > 0.0) {
      xs.push_back(std::log(static_cast<double>(r.S)));
      ys_star.push_back(std::log(r.I_star));
    }
    if (r.gap > 0.0) {
      xg.push_back(std::log(static_cast<double>(r.S)));
      ys_gap.push_back(std::log(r.gap));
    }
  }
  out.slope_I_star = lsq_slope(xs, ys_star);
  out.slope_gap = lsq_slope(xg, ys_gap);
  return out;
}

HarmonicFit harmonic_regression(const Vector& atom, double f0) {
  const int M = static_cast<int>(atom.size());
  if (M < 2) throw ConfigError("harmonic_regression: atom too short");
  HarmonicFit fit;
  if (atom.isZero(0.0)) {
    fit.degenerate = true;
    return fit;
  }

  const Vector t = Vector::LinSpaced(M, 0.0, M - 1.0);
  // Profile residual: amplitude/phase are linear least squares given f.
  const auto residual_at = [&](double f, double* alpha_out, double* beta_out) {
    const Vector c = (2.0 * std::numbers::pi * f / f0 * t.array()).cos();
    const Vector s = (2.0 * std::numbers::pi * f / f0 * t.array()).sin();
    const double cc = c.squaredNorm(), ss = s.squaredNorm(), cs = c.dot(s);
    const double ca = c.dot(atom), sa = s.dot(atom);
    const double det = cc * ss - cs * cs;
    double alpha, beta;
    if (std::abs(det) < 1e-12 * std::max(cc, ss) * std::max(cc, ss)) {
      alpha = cc > 0.0 ? ca / cc : 0.0;  // near-degenerate (f ~ 0 or Nyquist)
      beta = 0.0;
    } else {
      alpha = (ss * ca - cs * sa) / det;
      beta = (cc * sa - cs * ca) / det;
    }
    if (alpha_out) *alpha_out = alpha;
    if (beta_out) *beta_out = beta;
    return (atom - alpha * c - beta * s).squaredNorm();
  };

  const double step = f0 / (20.0 * M);
  const double f_max = 0.5 * f0;
  double best_f = step, best_r = std::numeric_limits<double>::infinity();
  for (double f = step; f <= f_max; f += step) {
    const double r = residual_at(f, nullptr, nullptr);
    if (r < best_r) {
      best_r = r;
      best_f = f;
    }
  }

  // Golden-section refinement of f inside the bracketing grid cells, run
  // well past the 1e-3 Hz requirement so exactly-harmonic atoms reach
  // machine-level residuals.
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = std::max(step * 0.5, best_f - step);
  double hi = std::min(f_max, best_f + step);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double r1 = residual_at(x1, nullptr, nullptr), r2 = residual_at(x2, nullptr, nullptr);
  while (hi - lo > 1e-9) {
    if (r1 < r2) {
      hi = x2;
      x2 = x1;
      r2 = r1;
      x1 = hi - gr * (hi - lo);
      r1 = residual_at(x1, nullptr, nullptr);
    } else {
      lo = x1;
      x1 = x2;
      r1 = r2;
      x2 = lo + gr * (hi - lo);
      r2 = residual_at(x2, nullptr, nullptr);
    }
  }
  fit.f = 0.5 * (lo + hi);
  double alpha = 0.0, beta = 0.0;
  residual_at(fit.f, &alpha, &beta);
  fit.a = std::hypot(alpha, beta);
  fit.theta = std::atan2(-beta, alpha);
  // Report the error evaluated directly at the returned parameters.
  const Vector model =
      fit.a * (2.0 * std::numbers::pi * fit.f / f0 * t.array() + fit.theta).cos();
  fit.error = (atom - model).squaredNorm();
  return fit;
}

namespace {

SolverAtoms rank_atoms(const SolveResult& result, const RealizationSet& data, double f0,
                       int top_k) {
  const Matrix V = empirical_power(result.phi, data).V;
  const Vector energy = V.rowwise().sum();
  std::vector<int> order(V.rows());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return energy(a) > energy(b); });
  order.resize(std::min<std::size_t>(order.size(), top_k));

  SolverAtoms out;
  out.atom_rows = order;
  out.atoms.resize(static_cast<Eigen::Index>(order.size()), result.phi.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    out.atoms.row(static_cast<Eigen::Index>(i)) = result.phi.mat().row(order[i]);
  out.W = result.factors.W;
  out.H = result.factors.H;
  for (std::size_t i = 0; i < order.size(); ++i)
    out.fits.push_back(
        harmonic_regression(out.atoms.row(static_cast<Eigen::Index>(i)).transpose(), f0));
  return out;
}

}  // namespace

AtomsExperiment run_atoms(const NotesSpec& spec, const SolverConfig& cfg, int threads,
                          int top_k) {
  const RealizationSet data = gen_notes(spec);
  const MultiInitReport rep = multi_init(data, cfg, MuVariant::kObjectiveConsistent, threads);
  return AtomsExperiment{rank_atoms(rep.best_tlnmf, data, spec.f0, top_k),
                         rank_atoms(rep.best_jdnmf, data, spec.f0, top_k)};
}

std::vector<ComplexityRow> run_complexity(const DatasetSpec& dataset, const SolverConfig& cfg,
                                          const std::vector<int>& J_grid) {
  if (J_grid.empty()) throw ConfigError("run_complexity: empty J grid");
  cfg.validate();
  const int S = std::holds_alternative<GcmSpec>(dataset) ? std::get<GcmSpec>(dataset).S
                                                         : std::get<NotesSpec>(dataset).S;
  const RealizationSet data = dataset_at(dataset, S);
  const DataContext ctx(data);
  const int j_max = *std::max_element(J_grid.begin(), J_grid.end());

  const Init init0 =
      random_init(ctx.M(), ctx.N(), cfg.K, init_seed(cfg.seed, 0), ctx.mean_power());

  SolverConfig run_cfg = cfg;
  run_cfg.J = j_max;
  const SolveResult tl = tlnmf_solve(ctx, run_cfg, init0);

  // The JD trajectory is shared across budgets; snapshot Phi after every
  // J_TL-th QN update, then refit the NMF from (W0, H0) per budget.
  std::vector<Matrix> snapshots(static_cast<std::size_t>(j_max) + 1);
  snapshots[0] = init0.phi.mat();
  SolveOptions opt;
  opt.qn_snapshot = [&](int t, const OrthogonalTransform& phi) {
    if ((t + 1) % cfg.J_TL == 0) snapshots[static_cast<std::size_t>(t + 1) / cfg.J_TL] = phi.mat();
  };
  jdnmf_solve(ctx, run_cfg, init0, opt);

  std::vector<ComplexityRow> rows;
  for (const int J : J_grid) {
    if (J < 0 || J > j_max) throw ConfigError("run_complexity: J out of range");
    const Matrix v_j = ctx.power(snapshots[static_cast<std::size_t>(J)]);
    const NmfFactors f_j = mu_run(PowerMatrix{v_j}, init0.factors, cfg.eps0, J * cfg.J_NMF);
    const double c_jd = detail::objectives_from_power(v_j, f_j, cfg.eps0).C;
    rows.push_back({J, tl.trace.at(static_cast<std::size_t>(J)).C, c_jd});
  }
  std::sort(rows.begin(), rows.end(),
            [](const ComplexityRow& a, const ComplexityRow& b) { return a.J < b.J; });
  return rows;
}

RateExperiment run_rate(const GcmSpec& base, const std::vector<int>& S_grid, int trials,
                        double eps0, double t, int threads) {
  if (S_grid.empty() || trials < 1) throw ConfigError("run_rate: empty grid or trials < 1");
  RateExperiment out;
  out.t = t;
  for (const int S : S_grid) {
    const std::uint64_t s_seed = split_seed(split_seed(base.seed, kRateTag),
                                            static_cast<std::uint64_t>(S));
    std::vector<double> qs(trials);
    parallel_tasks(trials, threads, [&](int trial) {
      GcmSpec spec = base;
      spec.S = S;
      spec.seed = split_seed(s_seed, static_cast<std::uint64_t>(trial));
      const auto [data, truth] = gen_gcm(spec);
      qs[trial] = q_s(truth.phi_bar, data, truth, eps0);
    });
    const double mn = static_cast<double>(base.M) * base.N;
    const double mean_q =
        std::accumulate(qs.begin(), qs.end(), 0.0) / (trials * mn);
    const double predicted =
        std::log(static_cast<double>(S)) - digamma(S / 2.0) - std::log(2.0);
    const double h = h_s(base.M, S, t);
    const double bound = h < 1.0 ? h * h / (1.0 - h) : kNaN;
    out.rows.push_back({S, mean_q, predicted, bound});
    out.trial_qs.push_back(std::move(qs));
  }
  return out;
}

// ---------------------------------------------------------------- output ---

void write_gap_csv(const std::filesystem::path& dir, const GapExperiment& gap) {
  std::filesystem::create_directories(dir);
  std::vector<std::vector<double>> rows;
  for (const GapRow& r : gap.rows)
    rows.push_back({static_cast<double>(r.S), r.I_star, r.I_dot, r.gap, r.C_star, r.C_dot,
                    r.L_star, r.L_dot, static_cast<double>(r.seed)});
  write_table_csv(dir / "gap.csv",
                  {"S", "I_star", "I_dot", "gap", "C_star", "C_dot", "L_star", "L_dot",
                   "seed"},
                  rows);
  write_table_csv(dir / "gap_slopes.csv", {"slope_I_star", "slope_gap"},
                  {{gap.slope_I_star, gap.slope_gap}});
}

namespace {

void write_solver_atoms(const std::filesystem::path& dir, const std::string& tag,
                        const SolverAtoms& atoms) {
  write_matrix_csv(dir / ("atoms_" + tag + ".csv"), atoms.atoms);
  write_matrix_csv(dir / ("w_" + tag + ".csv"), atoms.W);
  write_matrix_csv(dir / ("h_" + tag + ".csv"), atoms.H);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < atoms.fits.size(); ++i) {
    const HarmonicFit& f = atoms.fits[i];
    rows.push_back({static_cast<double>(atoms.atom_rows[i]), f.f, f.a, f.theta, f.error,
                    f.degenerate ? 1.0 : 0.0});
  }
  write_table_csv(dir / ("regression_" + tag + ".csv"),
                  {"atom_row", "f", "a", "theta", "error", "degenerate"}, rows);
}

}  // namespace

void write_atoms_csv(const std::filesystem::path& dir, const AtomsExperiment& atoms) {
  std::filesystem::create_directories(dir);
  write_solver_atoms(dir, "tlnmf", atoms.tlnmf);
  write_solver_atoms(dir, "jdnmf", atoms.jdnmf);
}

void write_complexity_csv(const std::filesystem::path& dir,
                          const std::vector<ComplexityRow>& rows) {
  std::filesystem::create_directories(dir);
  std::vector<std::vector<double>> table;
  for (const ComplexityRow& r : rows)
    table.push_back({static_cast<double>(r.J), r.C_tlnmf, r.C_jdnmf});
  write_table_csv(dir / "complexity.csv", {"J", "C_tlnmf", "C_jdnmf"}, table);
}

void write_rate_csv(const std::filesystem::path& dir, const RateExperiment& rate) {
  std::filesystem::create_directories(dir);
  std::vector<std::vector<double>> table;
  for (const RateRow& r : rate.rows)
    table.push_back({static_cast<double>(r.S), r.mean_qs_per_entry, r.predicted, r.bound});
  write_table_csv(dir / "rate.csv", {"S", "mean_qs_per_entry", "predicted", "bound"}, table);
}

void write_solve_result_csv(const std::filesystem::path& dir, const SolveResult& result) {
  std::filesystem::create_directories(dir);
  write_matrix_csv(dir / "phi.csv", result.phi.mat());
  write_matrix_csv(dir / "w.csv", result.factors.W);
  write_matrix_csv(dir / "h.csv", result.factors.H);
  std::vector<std::vector<double>> table;
  for (const TracePoint& p : result.trace)
    table.push_back({static_cast<double>(p.outer), p.C, p.L, p.I});
  write_table_csv(dir / "trace.csv", {"iter", "C", "L", "I"}, table);
}

}  // namespace tlnmf
