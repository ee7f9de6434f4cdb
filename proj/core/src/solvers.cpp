#include "tlnmf/solvers.hpp"

#include "tlnmf/linalg.hpp"
#include "tlnmf/parallel.hpp"
#include "tlnmf/rng.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace tlnmf {

std::uint64_t init_seed(std::uint64_t seed, int p) {
  return split_seed(split_seed(seed, 0x494E4954ULL), static_cast<std::uint64_t>(p));
}

Init random_init(int M, int N, int K, std::uint64_t seed, double mean_power) {
  Rng rng(seed);
  Matrix a(M, M);
  for (int j = 0; j < M; ++j)
    for (int i = 0; i < M; ++i) a(i, j) = rng.normal();
  OrthogonalTransform phi = polar_project(a);

  NmfFactors f;
  f.W.resize(M, K);
  for (int k = 0; k < K; ++k)
    for (int m = 0; m < M; ++m) f.W(m, k) = std::abs(rng.normal());
  for (int k = 0; k < K; ++k) f.W.col(k) /= f.W.col(k).sum();

  f.H.resize(K, N);
  for (int n = 0; n < N; ++n)
    for (int k = 0; k < K; ++k) f.H(k, n) = std::abs(rng.normal());
  const double mean0 = (f.W * f.H).mean();
  if (mean0 > 0.0 && mean_power > 0.0) f.H *= mean_power / mean0;
  return Init{std::move(phi), std::move(f)};
}

namespace {

double sum_log_plus(const Matrix& A, double eps0) {
  detail::CompensatedSum s;
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    for (Eigen::Index i = 0; i < A.rows(); ++i) s.add(std::log(A(i, j) + eps0));
  return s.value();
}

detail::ObjectiveTriple evaluate_objectives(const Matrix& V, const NmfFactors& f,
                                            double eps0, int outer) {
  const detail::ObjectiveTriple t = detail::objectives_from_power(V, f, eps0);
  const std::string where = " at outer iteration " + std::to_string(outer);
  check_finite(t.C, "C_S" + where);
  check_finite(t.L, "L_S" + where);
  check_finite(t.I, "I_S" + where);
  return t;
}

// Current transform with the cached quantities the inner loops reuse: the
// empirical power V, and (on the realization route) X = Phi * [Y^(1)..Y^(S)].
struct TransformState {
  OrthogonalTransform phi;
  Matrix X;  // empty on the covariance route
  Matrix V;

  TransformState(const DataContext& ctx, const OrthogonalTransform& phi0) : phi(phi0) {
    if (ctx.has_cov()) {
      V = detail::diag_of_transform_stack(phi.mat(), ctx.sigma());
    } else {
      X = phi.mat() * ctx.data().stacked();
      V = detail::power_from_stacked(X, ctx.N(), ctx.S());
    }
  }
};

// Line-search objective that caches the fields of its last evaluation, so an
// accepted trial can be adopted without recomputation.
struct TrialCache {
  Matrix X, V;
  double value = 0.0;
};

// One quasi-Newton step on C_S(., W, H) with the exponential-map retraction.
// Returns false on stall.
bool tl_qn_step(const DataContext& ctx, double eps0, const NmfFactors& f,
                TransformState& st) {
  const int M = ctx.M(), N = ctx.N(), S = ctx.S();
  const Matrix WHe = (f.W * f.H).array() + eps0;
  const Matrix P = WHe.cwiseInverse();
  // C_S(Phi~) = sum(V~ o P) + eps0 * sum(P) + sum log(WH + eps0); only the
  // first term depends on Phi~.
  const double const_term = eps0 * P.sum() + sum_log_plus(WHe, 0.0);

  Matrix G(M, M), Gamma(M, M);
  if (ctx.has_cov()) {
    G.setZero();
    Matrix t(M, M), b(M, M);
    for (int n = 0; n < N; ++n) {
      b.noalias() = st.phi.mat() * ctx.sigma()[n];
      t.noalias() = b * st.phi.mat().transpose();
      G.noalias() += P.col(n).asDiagonal() * t;
    }
    G *= 2.0;
  } else {
    Matrix weighted(M, static_cast<Eigen::Index>(N) * S);
    for (int s = 0; s < S; ++s)
      weighted.block(0, static_cast<Eigen::Index>(s) * N, M, N) =
          P.cwiseProduct(st.X.block(0, static_cast<Eigen::Index>(s) * N, M, N));
    G.noalias() = weighted * st.X.transpose();
    G *= 2.0 / S;
  }
  Gamma.noalias() = 2.0 * P * st.V.transpose();

  const Matrix E = tlnmf_direction(G, Gamma);

  TrialCache cache;
  const auto g = [&](const OrthogonalTransform& trial) {
    if (ctx.has_cov()) {
      cache.V = detail::diag_of_transform_stack(trial.mat(), ctx.sigma());
    } else {
      cache.X.noalias() = trial.mat() * ctx.data().stacked();
      cache.V = detail::power_from_stacked(cache.X, N, S);
    }
    cache.value = cache.V.cwiseProduct(P).sum() + const_term;
    return cache.value;
  };
  const double g_phi = st.V.cwiseProduct(P).sum() + const_term;

  LineSearchOutcome out = line_search(g, st.phi, g_phi, E, retract_exp);
  if (out.stalled) return false;
  st.phi = std::move(out.phi);
  st.V = std::move(cache.V);
  if (!ctx.has_cov()) st.X = std::move(cache.X);
  return true;
}

// One quasi-Newton step on L_S with the projection retraction.
bool jd_qn_step(const DataContext& ctx, double eps0, TransformState& st) {
  const int M = ctx.M(), N = ctx.N(), S = ctx.S();

  Matrix G = Matrix::Zero(M, M);
  Matrix Gamma = Matrix::Zero(M, M);
  Matrix t(M, M), b(M, M);
  Matrix xn;
  if (!ctx.has_cov()) xn.resize(M, S);
  for (int n = 0; n < N; ++n) {
    if (ctx.has_cov()) {
      b.noalias() = st.phi.mat() * ctx.sigma()[n];
      t.noalias() = b * st.phi.mat().transpose();
    } else {
      for (int s = 0; s < S; ++s) xn.col(s) = st.X.col(static_cast<Eigen::Index>(s) * N + n);
      t.noalias() = xn * xn.transpose();
      t /= static_cast<double>(S);
    }
    t.diagonal().array() += eps0;
    const Vector d = t.diagonal();
    const Vector dinv = d.cwiseInverse();
    G.noalias() += dinv.asDiagonal() * t;
    Gamma.noalias() += dinv * d.transpose();
  }
  G /= static_cast<double>(N);
  G.diagonal().array() -= 1.0;
  Gamma /= static_cast<double>(N);

  const Matrix E = jd_direction(G, Gamma);

  TrialCache cache;
  const auto g = [&](const OrthogonalTransform& trial) {
    if (ctx.has_cov()) {
      cache.V = detail::diag_of_transform_stack(trial.mat(), ctx.sigma());
    } else {
      cache.X.noalias() = trial.mat() * ctx.data().stacked();
      cache.V = detail::power_from_stacked(cache.X, N, S);
    }
    cache.value = static_cast<double>(M) * N + sum_log_plus(cache.V, eps0);
    return cache.value;
  };
  const double g_phi = static_cast<double>(M) * N + sum_log_plus(st.V, eps0);

  LineSearchOutcome out = line_search(g, st.phi, g_phi, E, retract_projection);
  if (out.stalled) return false;
  st.phi = std::move(out.phi);
  st.V = std::move(cache.V);
  if (!ctx.has_cov()) st.X = std::move(cache.X);
  return true;
}

void check_init(const DataContext& ctx, const SolverConfig& cfg, const Init& init) {
  cfg.validate();
  if (init.phi.size() != ctx.M())
    throw ContractViolation("solver: Phi0 dimension disagrees with data");
  if (init.factors.W.rows() != ctx.M() || init.factors.H.cols() != ctx.N() ||
      init.factors.K() != cfg.K)
    throw ContractViolation("solver: factor dimensions disagree with data/config");
  init.factors.require_feasible();
}

}  // namespace

SolveResult tlnmf_solve(const DataContext& ctx, const SolverConfig& cfg, const Init& init,
                        const SolveOptions& options) {
  check_init(ctx, cfg, init);
  const bool substep = options.granularity == TraceGranularity::kSubstep;

  TransformState st(ctx, init.phi);
  NmfFactors f = init.factors;
  std::vector<TracePoint> trace;
  const auto record = [&](int outer, TracePhase phase) {
    const detail::ObjectiveTriple t = evaluate_objectives(st.V, f, cfg.eps0, outer);
    trace.push_back({outer, phase, t.C, t.L, t.I});
  };
  record(0, TracePhase::kInit);

  // A stalled QN step at identical (Phi, W, H) would recompute the identical
  // stall; remember the factors of the last stall and skip the repeat.
  bool have_stall = false;
  Matrix stall_w, stall_h;
  for (int j = 0; j < cfg.J; ++j) {
    const PowerMatrix V{st.V};
    for (int t = 0; t < cfg.J_NMF; ++t) {
      f = mu_sweep(V, f, cfg.eps0, options.variant);
      if (substep) record(j + 1, TracePhase::kMu);
    }
    for (int t = 0; t < cfg.J_TL; ++t) {
      const bool repeat_stall = have_stall && (f.W.array() == stall_w.array()).all() &&
                                (f.H.array() == stall_h.array()).all();
      if (!repeat_stall) {
        if (tl_qn_step(ctx, cfg.eps0, f, st)) {
          have_stall = false;
        } else {
          have_stall = true;
          stall_w = f.W;
          stall_h = f.H;
        }
      }
      if (substep) record(j + 1, TracePhase::kQn);
    }
    if (!substep) record(j + 1, TracePhase::kQn);
  }
  return SolveResult{std::move(st.phi), std::move(f), std::move(trace), options.init_id};
}

SolveResult tlnmf_solve(const RealizationSet& data, const SolverConfig& cfg, const Init& init,
                        const SolveOptions& options) {
  const DataContext ctx(data);
  return tlnmf_solve(ctx, cfg, init, options);
}

SolveResult jdnmf_solve(const DataContext& ctx, const SolverConfig& cfg, const Init& init,
                        const SolveOptions& options) {
  check_init(ctx, cfg, init);
  const bool substep = options.granularity == TraceGranularity::kSubstep;

  TransformState st(ctx, init.phi);
  NmfFactors f = init.factors;
  std::vector<TracePoint> trace;
  const auto record = [&](int outer, TracePhase phase) {
    const detail::ObjectiveTriple t = evaluate_objectives(st.V, f, cfg.eps0, outer);
    trace.push_back({outer, phase, t.C, t.L, t.I});
  };
  record(0, TracePhase::kInit);

  // JD phase: J * J_TL quasi-Newton steps on L_S. Once a step stalls the
  // remaining steps would repeat the identical computation, so they are
  // reported without being re-run.
  const int total_qn = cfg.J * cfg.J_TL;
  bool stalled = false;
  for (int t = 0; t < total_qn; ++t) {
    if (!stalled) stalled = !jd_qn_step(ctx, cfg.eps0, st);
    if (options.qn_snapshot) options.qn_snapshot(t, st.phi);
    if (substep)
      record(t / cfg.J_TL + 1, TracePhase::kQn);
    else if ((t + 1) % cfg.J_TL == 0)
      record((t + 1) / cfg.J_TL, TracePhase::kQn);
  }

  // NMF phase: J * J_NMF multiplicative sweeps on I_S(Phi_J, ., .).
  const PowerMatrix V{st.V};
  const int total_mu = cfg.J * cfg.J_NMF;
  for (int t = 0; t < total_mu; ++t) {
    f = mu_sweep(V, f, cfg.eps0, options.variant);
    if (substep)
      record(cfg.J + t / cfg.J_NMF + 1, TracePhase::kMu);
    else if ((t + 1) % cfg.J_NMF == 0)
      record(cfg.J + (t + 1) / cfg.J_NMF, TracePhase::kMu);
  }
  return SolveResult{std::move(st.phi), std::move(f), std::move(trace), options.init_id};
}

SolveResult jdnmf_solve(const RealizationSet& data, const SolverConfig& cfg, const Init& init,
                        const SolveOptions& options) {
  const DataContext ctx(data);
  return jdnmf_solve(ctx, cfg, init, options);
}

MultiInitReport multi_init(const RealizationSet& data, const SolverConfig& cfg,
                           MuVariant variant, int threads) {
  cfg.validate();
  const DataContext ctx(data);
  const int P = cfg.P;

  std::vector<Init> base;
  base.reserve(P);
  for (int p = 0; p < P; ++p)
    base.push_back(random_init(ctx.M(), ctx.N(), cfg.K, init_seed(cfg.seed, p),
                               ctx.mean_power()));

  std::vector<SolveResult> tl, jd;
  tl.reserve(2 * P);
  jd.reserve(2 * P);
  {
    std::vector<SolveResult> tl_a(P, SolveResult{OrthogonalTransform::identity(2), {}, {}, 0});
    std::vector<SolveResult> jd_a = tl_a;
    parallel_tasks(2 * P, threads, [&](int task) {
      const int p = task % P;
      SolveOptions opt;
      opt.variant = variant;
      opt.init_id = p;
      if (task < P)
        tl_a[p] = tlnmf_solve(ctx, cfg, base[p], opt);
      else
        jd_a[p] = jdnmf_solve(ctx, cfg, base[p], opt);
    });
    // Cross-seeding: each solver's P solutions become P extra inits of the
    // other solver.
    std::vector<SolveResult> tl_b = tl_a, jd_b = jd_a;
    parallel_tasks(2 * P, threads, [&](int task) {
      const int p = task % P;
      SolveOptions opt;
      opt.variant = variant;
      opt.init_id = P + p;
      if (task < P)
        tl_b[p] = tlnmf_solve(ctx, cfg, Init{jd_a[p].phi, jd_a[p].factors}, opt);
      else
        jd_b[p] = jdnmf_solve(ctx, cfg, Init{tl_a[p].phi, tl_a[p].factors}, opt);
    });
    for (auto& r : tl_a) tl.push_back(std::move(r));
    for (auto& r : tl_b) tl.push_back(std::move(r));
    for (auto& r : jd_a) jd.push_back(std::move(r));
    for (auto& r : jd_b) jd.push_back(std::move(r));
  }

  MultiInitReport report{tl.front(), jd.front(), {}, {}};
  for (const auto& r : tl)
    report.tlnmf_candidates.push_back(
        {r.init_id, r.trace.back().C, r.trace.back().L, r.trace.back().I});
  for (const auto& r : jd)
    report.jdnmf_candidates.push_back(
        {r.init_id, r.trace.back().C, r.trace.back().L, r.trace.back().I});

  // TL-NMF keeps the smallest C_S over the 2P candidates.
  int best_tl = 0;
  for (int q = 1; q < 2 * P; ++q)
    if (tl[q].trace.back().C < tl[best_tl].trace.back().C) best_tl = q;
  report.best_tlnmf = tl[best_tl];

  // JD+NMF keeps the Phi with smallest L_S, then re-minimizes I_S(Phi, ., .)
  // from all 2P factor inits (P random + the P TL-NMF solutions).
  int best_jd = 0;
  for (int q = 1; q < 2 * P; ++q)
    if (jd[q].trace.back().L < jd[best_jd].trace.back().L) best_jd = q;
  const OrthogonalTransform& phi_dot = jd[best_jd].phi;
  const PowerMatrix v_dot{ctx.power(phi_dot.mat())};

  std::vector<NmfFactors> refit(2 * P);
  parallel_tasks(2 * P, threads, [&](int q) {
    const NmfFactors& f0 = q < P ? base[q].factors : tl[q - P].factors;
    refit[q] = mu_run(v_dot, f0, cfg.eps0, cfg.J * cfg.J_NMF, variant);
  });
  int best_refit = 0;
  double best_i = detail::is_div_sum(v_dot.V, refit[0].W * refit[0].H, cfg.eps0);
  for (int q = 1; q < 2 * P; ++q) {
    const double i_q = detail::is_div_sum(v_dot.V, refit[q].W * refit[q].H, cfg.eps0);
    if (i_q < best_i) {
      best_i = i_q;
      best_refit = q;
    }
  }
  report.best_jdnmf = jd[best_jd];
  report.best_jdnmf.factors = refit[best_refit];
  return report;
}

}  // namespace tlnmf
