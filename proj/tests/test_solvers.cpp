#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "tlnmf/datagen.hpp"
#include "tlnmf/linalg.hpp"
#include "tlnmf/objectives.hpp"
#include "tlnmf/solvers.hpp"

#include <cmath>

using namespace tlnmf;

namespace {

SolverConfig desk_gcm_config() {
  SolverConfig cfg;
  cfg.K = 5;
  cfg.eps0 = 1e-8;
  cfg.J_TL = 1;
  cfg.J_NMF = 10;
  cfg.J = 50;
  cfg.P = 2;
  cfg.seed = 7;
  return cfg;
}

std::pair<RealizationSet, GroundTruth> desk_gcm(int S, std::uint64_t seed) {
  GcmSpec spec;
  spec.M = 10;
  spec.N = 50;
  spec.K_bar = 5;
  spec.a = 1.0;
  spec.theta = 2.0;
  spec.S = S;
  spec.seed = seed;
  return gen_gcm(spec);
}

}  // namespace

TEST_CASE("random_init: feasibility, determinism, data-scaled H") {
  const auto [data, truth] = desk_gcm(5, 3);
  const DataContext ctx(data);
  const Init a = random_init(10, 50, 5, 123, ctx.mean_power());
  const Init b = random_init(10, 50, 5, 123, ctx.mean_power());
  CHECK(a.phi.orthogonality_error() <= 1e-10);
  CHECK_NOTHROW(a.factors.require_feasible());
  CHECK((a.phi.mat() - b.phi.mat()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.factors.H - b.factors.H).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.factors.W * a.factors.H).mean() ==
        doctest::Approx(ctx.mean_power()).epsilon(1e-12));
}

TEST_CASE("random_init: initial C_S finite over 1000 seeded draws") {
  const auto [data, truth] = desk_gcm(5, 11);
  const DataContext ctx(data);
  const SolverConfig cfg = desk_gcm_config();
  for (int p = 0; p < 1000; ++p) {
    const Init init = random_init(10, 50, 5, init_seed(cfg.seed, p), ctx.mean_power());
    const double c = objective_C(init.phi, init.factors, data, cfg.eps0);
    CHECK(std::isfinite(c));
  }
}

TEST_CASE("tlnmf_solve: J = 0 returns the init unchanged") {
  const auto [data, truth] = desk_gcm(3, 5);
  const DataContext ctx(data);
  SolverConfig cfg = desk_gcm_config();
  cfg.J = 0;
  const Init init = random_init(10, 50, 5, 1, ctx.mean_power());
  const SolveResult r = tlnmf_solve(ctx, cfg, init);
  CHECK((r.phi.mat() - init.phi.mat()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((r.factors.W - init.factors.W).cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.trace.size() == 1);
}

TEST_CASE("tlnmf_solve: C_S trace nonincreasing at substep granularity") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto [data, truth] = desk_gcm(4, seed);
    const DataContext ctx(data);
    SolverConfig cfg = desk_gcm_config();
    cfg.J = 30;
    cfg.seed = seed;
    const Init init = random_init(10, 50, 5, init_seed(seed, 0), ctx.mean_power());
    SolveOptions opt;
    opt.granularity = TraceGranularity::kSubstep;
    const SolveResult r = tlnmf_solve(ctx, cfg, init, opt);
    CHECK(r.trace.size() == 1 + 30 * (10 + 1));
    for (std::size_t i = 1; i < r.trace.size(); ++i)
      CHECK(r.trace[i].C <= r.trace[i - 1].C + 1e-10 * (1.0 + std::abs(r.trace[i - 1].C)));
    for (const TracePoint& p : r.trace)
      CHECK(std::abs(p.C - (p.L + p.I)) <= 1e-10 * (1.0 + std::abs(p.C)));
  }
}

TEST_CASE("tlnmf_solve: covariance-route trace agrees with the direct evaluation") {
  // S > M triggers the covariance route inside the solver; its recorded
  // objectives must match the stacked-realization evaluation path.
  const auto [data, truth] = desk_gcm(15, 21);
  SolverConfig cfg = desk_gcm_config();
  cfg.J = 10;
  const DataContext ctx(data);
  REQUIRE(ctx.has_cov());
  const Init init = random_init(10, 50, 5, 5, ctx.mean_power());
  const SolveResult r = tlnmf_solve(ctx, cfg, init);
  const double c_public = objective_C(r.phi, r.factors, data, cfg.eps0);
  CHECK(std::abs(r.trace.back().C - c_public) <= 1e-9 * (1.0 + std::abs(c_public)));
}

TEST_CASE("tlnmf_solve: learns the DCT rows on large-S GCM") {
  const auto [data, truth] = desk_gcm(5000, 2025);
  const DataContext ctx(data);
  SolverConfig cfg = desk_gcm_config();
  cfg.J = 1000;
  cfg.seed = 2025;

  // Best of three random inits (the landscape is nonconvex).
  double best_c = std::numeric_limits<double>::infinity();
  OrthogonalTransform best_phi = truth.phi_bar;
  for (int p = 0; p < 3; ++p) {
    const Init init = random_init(10, 50, 5, init_seed(cfg.seed, p), ctx.mean_power());
    const SolveResult r = tlnmf_solve(ctx, cfg, init);
    if (r.trace.back().C < best_c) {
      best_c = r.trace.back().C;
      best_phi = r.phi;
    }
  }
  const Matrix overlap = best_phi.mat() * truth.phi_bar.mat().transpose();
  for (int row = 0; row < 10; ++row)
    CHECK(overlap.col(row).cwiseAbs().maxCoeff() >= 0.95);
}

TEST_CASE("jdnmf_solve: J = 0 returns the init, traces split by phase") {
  const auto [data, truth] = desk_gcm(3, 9);
  const DataContext ctx(data);
  SolverConfig cfg = desk_gcm_config();
  cfg.J = 0;
  const Init init = random_init(10, 50, 5, 2, ctx.mean_power());
  const SolveResult r = jdnmf_solve(ctx, cfg, init);
  CHECK((r.phi.mat() - init.phi.mat()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.trace.size() == 1);
}

TEST_CASE("jdnmf_solve: L_S then I_S nonincreasing") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto [data, truth] = desk_gcm(4, 100 + seed);
    const DataContext ctx(data);
    SolverConfig cfg = desk_gcm_config();
    cfg.J = 30;
    const Init init = random_init(10, 50, 5, init_seed(seed, 1), ctx.mean_power());
    SolveOptions opt;
    opt.granularity = TraceGranularity::kSubstep;
    const SolveResult r = jdnmf_solve(ctx, cfg, init, opt);
    double prev_l = r.trace.front().L;
    double prev_i = r.trace.front().I;
    for (const TracePoint& p : r.trace) {
      if (p.phase == TracePhase::kQn) {
        CHECK(p.L <= prev_l + 1e-10 * (1.0 + std::abs(prev_l)));
        prev_l = p.L;
        prev_i = p.I;  // I is not controlled during the JD phase
      } else if (p.phase == TracePhase::kMu) {
        CHECK(p.I <= prev_i + 1e-10 * (1.0 + std::abs(prev_i)));
        prev_i = p.I;
      }
      CHECK(std::abs(p.C - (p.L + p.I)) <= 1e-10 * (1.0 + std::abs(p.C)));
    }
  }
}

TEST_CASE("jdnmf_solve: exactly diagonalizable data gets fully diagonalized") {
  // Realizations crafted so the empirical covariances equal the GCM truth
  // covariances exactly (S = M canonical spikes through Sigma^{1/2}).
  GcmSpec spec;
  spec.M = 6;
  spec.N = 10;
  spec.K_bar = 3;
  spec.S = 1;
  spec.seed = 77;
  const GroundTruth truth = gen_gcm(spec).second;
  std::vector<Matrix> ys(6, Matrix(6, 10));
  for (int n = 0; n < 10; ++n) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(truth.sigmas_true[n]);
    const Matrix root = eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().asDiagonal() *
                        eig.eigenvectors().transpose();
    for (int s = 0; s < 6; ++s) ys[s].col(n) = std::sqrt(6.0) * root.col(s);
  }
  const RealizationSet data(ys);
  const DataContext ctx(data);

  SolverConfig cfg;
  cfg.K = 3;
  cfg.eps0 = 1e-9;
  cfg.J = 300;
  cfg.J_TL = 1;
  cfg.J_NMF = 10;
  cfg.seed = 5;
  const Init init = random_init(6, 10, 3, init_seed(5, 0), ctx.mean_power());
  const SolveResult r = jdnmf_solve(ctx, cfg, init);

  const auto off_energy = [&](const OrthogonalTransform& p) {
    double acc = 0.0;
    for (int n = 0; n < 10; ++n) {
      const Matrix t = p.mat() * truth.sigmas_true[n] * p.mat().transpose();
      acc += t.squaredNorm() - t.diagonal().squaredNorm();
    }
    return acc;
  };
  CHECK(off_energy(r.phi) <= 1e-8 * off_energy(init.phi));
}

TEST_CASE("multi_init: P = 1 gives the cross-seeded pair, selections optimal") {
  const auto [data, truth] = desk_gcm(6, 33);
  SolverConfig cfg = desk_gcm_config();
  cfg.P = 1;
  cfg.J = 20;
  const MultiInitReport rep = multi_init(data, cfg);
  CHECK(rep.tlnmf_candidates.size() == 2);
  CHECK(rep.jdnmf_candidates.size() == 2);

  const double best_c =
      std::min(rep.tlnmf_candidates[0].C, rep.tlnmf_candidates[1].C);
  const double chosen_c = objective_C(rep.best_tlnmf.phi, rep.best_tlnmf.factors, data,
                                      cfg.eps0);
  CHECK(chosen_c <= best_c + 1e-9 * (1.0 + std::abs(best_c)));

  const double best_l = std::min(rep.jdnmf_candidates[0].L, rep.jdnmf_candidates[1].L);
  const double chosen_l = objective_L(rep.best_jdnmf.phi, data, cfg.eps0);
  CHECK(chosen_l <= best_l + 1e-9 * (1.0 + std::abs(best_l)));
}

TEST_CASE("multi_init: parallel run matches the serial run") {
  const auto [data, truth] = desk_gcm(6, 55);
  SolverConfig cfg = desk_gcm_config();
  cfg.P = 2;
  cfg.J = 15;
  const MultiInitReport serial = multi_init(data, cfg, MuVariant::kObjectiveConsistent, 1);
  const MultiInitReport parallel = multi_init(data, cfg, MuVariant::kObjectiveConsistent, 4);
  CHECK((serial.best_tlnmf.phi.mat() - parallel.best_tlnmf.phi.mat()).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK((serial.best_jdnmf.factors.W - parallel.best_jdnmf.factors.W)
            .cwiseAbs()
            .maxCoeff() == 0.0);
  for (std::size_t i = 0; i < serial.tlnmf_candidates.size(); ++i)
    CHECK(serial.tlnmf_candidates[i].C == parallel.tlnmf_candidates[i].C);
}

TEST_CASE("solvers: infeasible init is rejected") {
  const auto [data, truth] = desk_gcm(3, 66);
  const DataContext ctx(data);
  const SolverConfig cfg = desk_gcm_config();
  Init init = random_init(10, 50, 5, 4, ctx.mean_power());
  init.factors.W(0, 0) += 0.5;  // break the column normalization
  CHECK_THROWS_AS(tlnmf_solve(ctx, cfg, init, {}), ContractViolation);
  CHECK_THROWS_AS(jdnmf_solve(ctx, cfg, init, {}), ContractViolation);
}
