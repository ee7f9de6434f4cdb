// Micro-benchmarks for the per-iteration building blocks. The interesting
// split is the S <= M (stacked realizations) versus S > M (covariance stack)
// regimes of the power/gradient evaluations.

#include <benchmark/benchmark.h>

#include "tlnmf/datagen.hpp"
#include "tlnmf/linalg.hpp"
#include "tlnmf/nmf_mu.hpp"
#include "tlnmf/objectives.hpp"
#include "tlnmf/qn.hpp"
#include "tlnmf/rng.hpp"

using namespace tlnmf;

namespace {

RealizationSet gcm_data(int M, int N, int S) {
  GcmSpec spec;
  spec.M = M;
  spec.N = N;
  spec.K_bar = std::min(5, std::min(M, N));
  spec.S = S;
  spec.seed = 1;
  return gen_gcm(spec).first;
}

NmfFactors uniform_factors(int M, int K, int N) {
  NmfFactors f;
  f.W = Matrix::Constant(M, K, 1.0 / M);
  f.H = Matrix::Constant(K, N, 1.0);
  return f;
}

void BM_empirical_power_gcm(benchmark::State& state) {
  const int S = static_cast<int>(state.range(0));
  const RealizationSet data = gcm_data(10, 50, S);
  const OrthogonalTransform phi = dct2_matrix(10);
  for (auto _ : state) benchmark::DoNotOptimize(empirical_power(phi, data).V.sum());
}
BENCHMARK(BM_empirical_power_gcm)->Arg(10)->Arg(100)->Arg(1000);

void BM_power_covariance_route(benchmark::State& state) {
  const int S = static_cast<int>(state.range(0));
  const RealizationSet data = gcm_data(10, 50, S);
  const DataContext ctx(data);
  const Matrix phi = dct2_matrix(10).mat();
  for (auto _ : state) benchmark::DoNotOptimize(ctx.power(phi).sum());
}
BENCHMARK(BM_power_covariance_route)->Arg(100)->Arg(1000);

void BM_mu_sweep(benchmark::State& state) {
  const int M = static_cast<int>(state.range(0));
  const int N = 2 * M;
  Rng rng(2);
  Matrix v(M, N);
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < M; ++i) v(i, j) = std::abs(rng.normal());
  const PowerMatrix V{v};
  NmfFactors f = uniform_factors(M, 5, N);
  for (auto _ : state) {
    f = mu_sweep(V, f, 1e-8);
    benchmark::DoNotOptimize(f.H(0, 0));
  }
}
BENCHMARK(BM_mu_sweep)->Arg(10)->Arg(50)->Arg(200);

void BM_tlnmf_gradient(benchmark::State& state) {
  const int S = static_cast<int>(state.range(0));
  const RealizationSet data = gcm_data(10, 50, S);
  const OrthogonalTransform phi = dct2_matrix(10);
  const NmfFactors f = uniform_factors(10, 5, 50);
  for (auto _ : state)
    benchmark::DoNotOptimize(tlnmf_gradient(phi, data, f, 1e-8).sum());
}
BENCHMARK(BM_tlnmf_gradient)->Arg(10)->Arg(100)->Arg(1000);

void BM_jd_gradient(benchmark::State& state) {
  const RealizationSet data = gcm_data(10, 50, 100);
  const CovarianceStack cov = covariance_stack(data, 1e-8);
  const OrthogonalTransform phi = dct2_matrix(10);
  for (auto _ : state) benchmark::DoNotOptimize(jd_gradient(phi, cov).sum());
}
BENCHMARK(BM_jd_gradient);

void BM_matrix_exp(benchmark::State& state) {
  const int M = static_cast<int>(state.range(0));
  Rng rng(3);
  Matrix a(M, M);
  for (int j = 0; j < M; ++j)
    for (int i = 0; i < M; ++i) a(i, j) = rng.normal();
  const Matrix e = 0.05 * (a - a.transpose());
  for (auto _ : state) benchmark::DoNotOptimize(matrix_exp_antisym(e).mat()(0, 0));
}
BENCHMARK(BM_matrix_exp)->Arg(10)->Arg(50)->Arg(200);

void BM_polar_project(benchmark::State& state) {
  const int M = static_cast<int>(state.range(0));
  Rng rng(4);
  Matrix a(M, M);
  for (int j = 0; j < M; ++j)
    for (int i = 0; i < M; ++i) a(i, j) = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(polar_project(a).mat()(0, 0));
}
BENCHMARK(BM_polar_project)->Arg(10)->Arg(50)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
