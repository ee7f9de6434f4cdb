#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "tlnmf/datagen.hpp"
#include "tlnmf/linalg.hpp"
#include "tlnmf/objectives.hpp"
#include "tlnmf/rng.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace tlnmf;

namespace {

Matrix random_gaussian(int m, int n, Rng& rng) {
  Matrix a(m, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i) a(i, j) = rng.normal();
  return a;
}

OrthogonalTransform random_orthogonal(int m, Rng& rng) {
  return polar_project(random_gaussian(m, m, rng));
}

NmfFactors random_feasible_factors(int m, int k, int n, Rng& rng) {
  NmfFactors f;
  f.W = random_gaussian(m, k, rng).cwiseAbs();
  for (int j = 0; j < k; ++j) f.W.col(j) /= f.W.col(j).sum();
  f.H = random_gaussian(k, n, rng).cwiseAbs();
  return f;
}

Matrix sym_sqrt(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
  return eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().asDiagonal() *
         eig.eigenvectors().transpose();
}

// Realizations whose empirical covariance equals sigma exactly: with S = M,
// y_n^(s) = sqrt(M) Sigma_n^{1/2} e_s.
RealizationSet data_matching_covariance(const std::vector<Matrix>& sigmas) {
  const int M = static_cast<int>(sigmas.front().rows());
  const int N = static_cast<int>(sigmas.size());
  std::vector<Matrix> ys(M, Matrix(M, N));
  for (int n = 0; n < N; ++n) {
    const Matrix root = sym_sqrt(sigmas[n]);
    for (int s = 0; s < M; ++s) ys[s].col(n) = std::sqrt(static_cast<double>(M)) * root.col(s);
  }
  return RealizationSet(ys);
}

}  // namespace

TEST_CASE("empirical_power: identity transform squares the data") {
  std::vector<Matrix> ys = {Matrix(2, 1)};
  ys[0] << 1.0, 3.0;
  const RealizationSet data(ys);
  const Matrix v = empirical_power(OrthogonalTransform::identity(2), data).V;
  CHECK(v(0, 0) == 1.0);
  CHECK(v(1, 0) == 9.0);

  // Scalar-style sanity in the smallest legal shape: mean of squares.
  std::vector<Matrix> two = {Matrix(2, 1), Matrix(2, 1)};
  two[0] << 1.0, 0.0;
  two[1] << 3.0, 0.0;
  const Matrix v2 = empirical_power(OrthogonalTransform::identity(2), RealizationSet(two)).V;
  CHECK(v2(0, 0) == 5.0);
}

TEST_CASE("empirical_power: permutation equivariance of rows") {
  Rng rng(2);
  std::vector<Matrix> ys = {random_gaussian(4, 6, rng), random_gaussian(4, 6, rng)};
  const RealizationSet data(ys);
  Matrix perm = Matrix::Zero(4, 4);
  perm(0, 2) = perm(1, 0) = perm(2, 3) = perm(3, 1) = 1.0;
  const Matrix v_id = empirical_power(OrthogonalTransform::identity(4), data).V;
  const Matrix v_perm = empirical_power(OrthogonalTransform(perm), data).V;
  CHECK((v_perm - perm * v_id).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("covariance_stack: canonical vector and eps0 floor") {
  std::vector<Matrix> ys = {Matrix::Zero(3, 2)};
  ys[0](0, 0) = 1.0;  // y_0 = e_1, y_1 = 0
  const CovarianceStack cov0 = covariance_stack(RealizationSet(ys), 0.0);
  Matrix e11 = Matrix::Zero(3, 3);
  e11(0, 0) = 1.0;
  CHECK((cov0.sigmas[0] - e11).cwiseAbs().maxCoeff() == 0.0);
  const CovarianceStack cov_eps = covariance_stack(RealizationSet(ys), 0.5);
  CHECK((cov_eps.sigmas[1] - 0.5 * Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("covariance_stack: diagonal identity against empirical power") {
  Rng rng(4);
  std::vector<Matrix> ys;
  for (int s = 0; s < 3; ++s) ys.push_back(random_gaussian(5, 7, rng));
  const RealizationSet data(ys);
  const double eps0 = 1e-3;
  const CovarianceStack cov = covariance_stack(data, eps0);
  const OrthogonalTransform phi = random_orthogonal(5, rng);
  const Matrix v = empirical_power(phi, data).V;
  for (int n = 0; n < 7; ++n) {
    const Vector diag = (phi.mat() * cov.sigmas[n] * phi.mat().transpose()).diagonal();
    CHECK((diag - (v.col(n).array() + eps0).matrix()).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("is_div_reg: zero at equality, scalar value, loop oracle") {
  Rng rng(6);
  const Matrix a = random_gaussian(3, 4, rng).cwiseAbs();
  CHECK(is_div_reg(a, a, 1e-8) == 0.0);

  Matrix x(1, 1), y(1, 1);
  x << 2.0;
  y << 1.0;
  CHECK(std::abs(is_div_reg(x, y, 1e-15) - (1.0 - std::log(2.0))) <= 1e-6);

  const Matrix b = random_gaussian(3, 4, rng).cwiseAbs();
  const double eps0 = 1e-6;
  double oracle = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) {
      const double r = (a(i, j) + eps0) / (b(i, j) + eps0);
      oracle += r - std::log(r) - 1.0;
    }
  CHECK(std::abs(is_div_reg(a, b, eps0) - oracle) <= 1e-12);
  CHECK(is_div_reg(a, b, eps0) >= 0.0);
}

TEST_CASE("objective_I: exact factorizations give zero") {
  Rng rng(8);
  const int M = 4, N = 5;
  const Matrix v = random_gaussian(M, N, rng).cwiseAbs().array() + 0.1;
  std::vector<Matrix> ys = {v.cwiseSqrt()};
  const RealizationSet data(ys);
  const OrthogonalTransform id = OrthogonalTransform::identity(M);

  // (W, H) with WH = V, built by populating W with V and H with I_N, then
  // renormalizing the pair into F_K.
  const int K = N;
  NmfFactors f;
  f.W = v;
  f.H = Matrix::Identity(K, N);
  for (int k = 0; k < K; ++k) {
    const double s = f.W.col(k).sum();
    f.W.col(k) /= s;
    f.H.row(k) *= s;
  }
  f.require_feasible();
  CHECK(std::abs(objective_I(id, f, data, 1e-9)) <= 1e-10);
}

TEST_CASE("objective_C = objective_L + objective_I on random instances") {
  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Matrix> ys;
    for (int s = 0; s < 2; ++s) ys.push_back(random_gaussian(4, 6, rng));
    const RealizationSet data(ys);
    const OrthogonalTransform phi = random_orthogonal(4, rng);
    const NmfFactors f = random_feasible_factors(4, 2, 6, rng);
    const double eps0 = 1e-8;
    const double c = objective_C(phi, f, data, eps0);
    const double l = objective_L(phi, data, eps0);
    const double i = objective_I(phi, f, data, eps0);
    CHECK(std::abs(c - (l + i)) <= 1e-10 * (1.0 + std::abs(c)));
  }
}

TEST_CASE("objective_L: all-ones power gives MN, permutation invariance") {
  const int M = 3, N = 4;
  std::vector<Matrix> ys = {Matrix::Ones(M, N)};
  const RealizationSet data(ys);
  // V = 1 everywhere, eps0 -> 0: L = MN + sum log(1) = MN.
  CHECK(objective_L(OrthogonalTransform::identity(M), data, 0.0) ==
        doctest::Approx(12.0).epsilon(1e-12));

  Matrix perm = Matrix::Zero(M, M);
  perm(0, 1) = perm(1, 2) = perm(2, 0) = 1.0;
  CHECK(objective_L(OrthogonalTransform(perm), data, 0.0) ==
        doctest::Approx(12.0).epsilon(1e-12));
}

TEST_CASE("objective_L matches objective_L_jd on GCM draws, including S < M") {
  Rng seeds(123);
  for (int trial = 0; trial < 20; ++trial) {
    GcmSpec spec;
    spec.M = 6;
    spec.N = 9;
    spec.K_bar = 3;
    spec.S = (trial % 3 == 0) ? 2 : 12;  // exercise S < M via eps0
    spec.seed = 1000 + trial;
    const auto [data, truth] = gen_gcm(spec);
    const double eps0 = 1e-8;
    const CovarianceStack cov = covariance_stack(data, eps0);
    Rng rng(trial);
    const OrthogonalTransform phi = random_orthogonal(6, rng);
    const double l = objective_L(phi, data, eps0);
    const double l_jd = objective_L_jd(phi, cov);
    CHECK(std::abs(l - l_jd) <= 1e-8 * (1.0 + std::abs(l)));
  }
}

TEST_CASE("objective_L_jd: identity and diagonal stacks") {
  CovarianceStack cov;
  cov.sigmas.assign(4, Matrix::Identity(3, 3));
  const OrthogonalTransform q = dct2_matrix(3);
  CHECK(objective_L_jd(q, cov) == doctest::Approx(12.0).epsilon(1e-12));

  CovarianceStack diag_stack;
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 1.0, 2.0, 3.0;
  diag_stack.sigmas = {d};
  const double expected = 3.0 + std::log(1.0) + std::log(2.0) + std::log(3.0);
  CHECK(objective_L_jd(OrthogonalTransform::identity(3), diag_stack) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("objective_C: model equal to power reduces to objective_L") {
  Rng rng(14);
  const int M = 4, N = 4, K = 4;
  const Matrix v = random_gaussian(M, N, rng).cwiseAbs().array() + 0.2;
  std::vector<Matrix> ys = {v.cwiseSqrt()};
  const RealizationSet data(ys);
  const OrthogonalTransform id = OrthogonalTransform::identity(M);
  NmfFactors f;
  f.W = v;
  f.H = Matrix::Identity(K, N);
  for (int k = 0; k < K; ++k) {
    const double s = f.W.col(k).sum();
    f.W.col(k) /= s;
    f.H.row(k) *= s;
  }
  const double eps0 = 1e-9;
  CHECK(std::abs(objective_C(id, f, data, eps0) - objective_L(id, data, eps0)) <= 1e-9);
}

TEST_CASE("q_s: zero when empirical power equals true power") {
  GcmSpec spec;
  spec.M = 4;
  spec.N = 5;
  spec.K_bar = 2;
  spec.S = 1;
  spec.seed = 3;
  const GroundTruth truth = gen_gcm(spec).second;
  const RealizationSet data = data_matching_covariance(truth.sigmas_true);
  Rng rng(5);
  const OrthogonalTransform phi = random_orthogonal(4, rng);
  CHECK(q_s(phi, data, truth, 1e-8) <= 1e-12);
}

TEST_CASE("q_s: chi-square mean at Phi_bar follows the digamma formula") {
  GcmSpec spec;
  spec.M = 10;
  spec.N = 50;
  spec.K_bar = 5;
  spec.S = 100;
  spec.seed = 2024;
  const auto [data, truth] = gen_gcm(spec);
  const double qs = q_s(truth.phi_bar, data, truth, 1e-12);
  const double predicted =
      std::log(100.0) - digamma(50.0) - std::log(2.0);  // ~1/S per entry
  CHECK(std::abs(qs / 500.0 - predicted) <= 0.25 * predicted);
}

TEST_CASE("exact_oracle_factors: recovers normalized truth at Phi_bar") {
  GcmSpec spec;
  spec.M = 5;
  spec.N = 6;
  spec.K_bar = 3;
  spec.S = 1;
  spec.seed = 11;
  const GroundTruth truth = gen_gcm(spec).second;
  const NmfFactors f = exact_oracle_factors(truth.phi_bar, truth, 3);
  for (int k = 0; k < 3; ++k) {
    const Vector expected = truth.w_bar.col(k) / truth.w_bar.col(k).sum();
    CHECK((f.W.col(k) - expected).cwiseAbs().maxCoeff() <= 1e-12);
  }
  CHECK_THROWS_AS(exact_oracle_factors(truth.phi_bar, truth, 2), ConfigError);
}

TEST_CASE("exact_oracle_factors: F_K membership and triple-loop power oracle") {
  GcmSpec spec;
  spec.M = 5;
  spec.N = 6;
  spec.K_bar = 3;
  spec.S = 1;
  spec.seed = 13;
  const GroundTruth truth = gen_gcm(spec).second;
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const OrthogonalTransform phi = random_orthogonal(5, rng);
    const NmfFactors f = exact_oracle_factors(phi, truth, 4);
    for (int k = 0; k < 4; ++k) CHECK(std::abs(f.W.col(k).sum() - 1.0) <= 1e-12);

    // E(|Phi Y|^2)_{mn} = sum_{m'} d_{mm'}^2 [W_bar H_bar]_{m'n}, by the
    // model conditions.
    const Matrix d = phi.mat() * truth.phi_bar.mat().transpose();
    const Matrix v_bar = truth.w_bar * truth.h_bar;
    const Matrix wh = f.W * f.H;
    for (int n = 0; n < 6; ++n)
      for (int m = 0; m < 5; ++m) {
        double expected = 0.0;
        for (int mp = 0; mp < 5; ++mp) expected += d(m, mp) * d(m, mp) * v_bar(mp, n);
        CHECK(std::abs(wh(m, n) - expected) <= 1e-10);
      }
    // And it matches the true power computed from the covariances.
    CHECK((wh - true_power(phi, truth)).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("u_s_bound: exact match gives zero; crafted deviation gives 0.25") {
  GcmSpec spec;
  spec.M = 4;
  spec.N = 3;
  spec.K_bar = 2;
  spec.S = 1;
  spec.seed = 19;
  const GroundTruth truth = gen_gcm(spec).second;
  const RealizationSet exact = data_matching_covariance(truth.sigmas_true);
  CHECK(u_s_bound(exact, truth) <= 1e-10);

  // Sigma = 4 I, empirical 5 I: |5/4 - 1| = 0.25 in every direction.
  GroundTruth iso{OrthogonalTransform::identity(2),
                  Matrix::Constant(2, 1, 1.0),
                  Matrix::Constant(1, 1, 4.0),
                  {4.0 * Matrix::Identity(2, 2)}};
  std::vector<Matrix> ys(2, Matrix(2, 1));
  ys[0].col(0) << std::sqrt(10.0), 0.0;
  ys[1].col(0) << 0.0, std::sqrt(10.0);
  CHECK(u_s_bound(RealizationSet(ys), iso) == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("u_s_bound: Lemma-6 inequality Q_S <= MN u^2/(1-u) over random Phi") {
  GcmSpec spec;
  spec.M = 4;
  spec.N = 8;
  spec.K_bar = 2;
  spec.S = 400;
  spec.seed = 23;
  const auto [data, truth] = gen_gcm(spec);
  const double u = u_s_bound(data, truth);
  REQUIRE(u < 1.0);
  const double bound = 4.0 * 8.0 * u * u / (1.0 - u);
  Rng rng(29);
  for (int trial = 0; trial < 200; ++trial) {
    const OrthogonalTransform phi = random_orthogonal(4, rng);
    CHECK(q_s(phi, data, truth, 1e-12) <= bound);
  }
}

TEST_CASE("h_s: formula and limit") {
  CHECK(h_s(10, 1000, 3.0) ==
        doctest::Approx(3.0 * (std::sqrt(10.0) + 3.0) / std::sqrt(1000.0)).epsilon(1e-14));
  CHECK(h_s(10, 1000000000, 3.0) <= 1e-3);
}

TEST_CASE("I_S at the oracle factors equals Q_S") {
  GcmSpec spec;
  spec.M = 6;
  spec.N = 8;
  spec.K_bar = 3;
  spec.S = 10;
  spec.seed = 31;
  const auto [data, truth] = gen_gcm(spec);
  Rng rng(37);
  for (int trial = 0; trial < 10; ++trial) {
    const OrthogonalTransform phi = random_orthogonal(6, rng);
    const NmfFactors f = exact_oracle_factors(phi, truth, 3);
    const double i = objective_I(phi, f, data, 1e-8);
    const double q = q_s(phi, data, truth, 1e-8);
    CHECK(std::abs(i - q) <= 1e-9 * (1.0 + std::abs(q)));
  }
}

TEST_CASE("objectives: shape mismatches and corrupted stacks are rejected") {
  Rng rng(43);
  std::vector<Matrix> ys = {random_gaussian(4, 5, rng)};
  const RealizationSet data(ys);
  CHECK_THROWS_AS(empirical_power(OrthogonalTransform::identity(3), data),
                  ContractViolation);
  CHECK_THROWS_AS(is_div_reg(Matrix::Ones(2, 2), Matrix::Ones(2, 3), 1e-8),
                  ContractViolation);

  NmfFactors bad;
  bad.W = Matrix::Constant(3, 2, 1.0 / 3.0);  // M = 3 but data has M = 4
  bad.H = Matrix::Constant(2, 5, 1.0);
  CHECK_THROWS_AS(objective_I(OrthogonalTransform::identity(4), bad, data, 1e-8),
                  ContractViolation);

  CovarianceStack corrupted;
  Matrix s = Matrix::Identity(4, 4);
  s(2, 2) = -1.0;  // a nonpositive diagonal entry survives any rotation Phi = I
  corrupted.sigmas = {s};
  CHECK_THROWS_AS(objective_L_jd(OrthogonalTransform::identity(4), corrupted),
                  NumericalError);
}

TEST_CASE("DataContext: both routes agree on the empirical power") {
  Rng rng(41);
  std::vector<Matrix> ys;
  for (int s = 0; s < 7; ++s) ys.push_back(random_gaussian(4, 5, rng));  // S > M
  const RealizationSet data(ys);
  const DataContext ctx(data);
  CHECK(ctx.has_cov());
  const OrthogonalTransform phi = random_orthogonal(4, rng);
  const Matrix v_ctx = ctx.power(phi.mat());
  const Matrix v_direct = empirical_power(phi, data).V;
  CHECK((v_ctx - v_direct).cwiseAbs().maxCoeff() <= 1e-12);
}
