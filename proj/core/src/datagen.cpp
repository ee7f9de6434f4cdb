#include "tlnmf/datagen.hpp"

#include "tlnmf/rng.hpp"

#include <cmath>
#include <numbers>

namespace tlnmf {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

void GcmSpec::validate() const {
  if (M < 2 || N < 1) throw ConfigError("GcmSpec: M >= 2 and N >= 1 required");
  if (K_bar < 1 || K_bar > std::min(M, N))
    throw ConfigError("GcmSpec: 1 <= K_bar <= min(M, N) required");
  if (!(a > 0.0) || !(theta > 0.0)) throw ConfigError("GcmSpec: a, theta > 0 required");
  if (S < 1) throw ConfigError("GcmSpec: S >= 1 required");
}

void NotesSpec::validate() const {
  if (T < 1) throw ConfigError("NotesSpec: T >= 1 required");
  if (!(f0 > 0.0)) throw ConfigError("NotesSpec: f0 > 0 required");
  if (frame_len % 2 != 0) throw ConfigError("NotesSpec: frame_len must be even");
  if (frame_len > T) throw ConfigError("NotesSpec: frame_len > T");
  if (hop < 1 || hop > frame_len) throw ConfigError("NotesSpec: 1 <= hop <= frame_len");
  if (R < 1) throw ConfigError("NotesSpec: R >= 1 required");
  if (S < 1) throw ConfigError("NotesSpec: S >= 1 required");
}

OrthogonalTransform dct2_matrix(int M) {
  if (M < 2) throw ConfigError("dct2_matrix: M >= 2 required");
  Matrix phi(M, M);
  const double c0 = std::sqrt(1.0 / M);
  const double ck = std::sqrt(2.0 / M);
  for (int k = 0; k < M; ++k)
    for (int m = 0; m < M; ++m)
      phi(k, m) = (k == 0 ? c0 : ck) * std::cos(std::numbers::pi * (m + 0.5) * k / M);
  return OrthogonalTransform(std::move(phi));
}

namespace {

RealizationSet gcm_realizations(const GcmSpec& spec, const Matrix& phi_bar_t,
                                const Matrix& v_bar, std::uint64_t noise_seed) {
  const Matrix std_dev = v_bar.cwiseSqrt();
  Matrix stacked(spec.M, static_cast<Eigen::Index>(spec.N) * spec.S);
  Matrix x(spec.M, spec.N);
  for (int s = 0; s < spec.S; ++s) {
    Rng rng(split_seed(noise_seed, static_cast<std::uint64_t>(s)));
    for (int n = 0; n < spec.N; ++n)
      for (int m = 0; m < spec.M; ++m) x(m, n) = std_dev(m, n) * rng.normal();
    stacked.block(0, static_cast<Eigen::Index>(s) * spec.N, spec.M, spec.N).noalias() =
        phi_bar_t * x;
  }
  return RealizationSet(std::move(stacked), spec.N, spec.S);
}

}  // namespace

std::pair<RealizationSet, GroundTruth> gen_gcm(const GcmSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  Matrix w_bar(spec.M, spec.K_bar);
  for (int k = 0; k < spec.K_bar; ++k)
    for (int m = 0; m < spec.M; ++m) w_bar(m, k) = rng.gamma(spec.a, spec.theta);
  Matrix h_bar(spec.K_bar, spec.N);
  for (int n = 0; n < spec.N; ++n)
    for (int k = 0; k < spec.K_bar; ++k) h_bar(k, n) = rng.gamma(spec.a, spec.theta);

  OrthogonalTransform phi_bar = dct2_matrix(spec.M);
  const Matrix v_bar = w_bar * h_bar;

  std::vector<Matrix> sigmas(spec.N);
  const Matrix& phi = phi_bar.mat();
  for (int n = 0; n < spec.N; ++n)
    sigmas[n] = phi.transpose() * v_bar.col(n).asDiagonal() * phi;

  GroundTruth truth{std::move(phi_bar), std::move(w_bar), std::move(h_bar),
                    std::move(sigmas)};
  RealizationSet data =
      gcm_realizations(spec, truth.phi_bar.mat().transpose(), v_bar, spec.seed);
  return {std::move(data), std::move(truth)};
}

RealizationSet gen_gcm_realizations(const GcmSpec& spec, const GroundTruth& truth,
                                    std::uint64_t noise_seed) {
  spec.validate();
  if (truth.phi_bar.size() != spec.M || truth.h_bar.cols() != spec.N)
    throw ConfigError("gen_gcm_realizations: truth dimensions disagree with spec");
  const Matrix v_bar = truth.w_bar * truth.h_bar;
  return gcm_realizations(spec, truth.phi_bar.mat().transpose(), v_bar, noise_seed);
}

Vector notes_envelope(const NotesSpec& spec, int note) {
  // Activity intervals in samples; ramps occupy the first/last 10 ms of each.
  const int sec = static_cast<int>(std::lround(spec.f0));
  const int ramp = std::max(1, static_cast<int>(std::lround(0.010 * spec.f0)));
  std::vector<std::pair<int, int>> active;
  if (note == 0)
    active = {{0, std::min(sec, spec.T)}, {std::min(2 * sec, spec.T), spec.T}};
  else
    active = {{std::min(sec, spec.T), spec.T}};

  Vector g = Vector::Zero(spec.T);
  for (auto [lo, hi] : active) {
    for (int t = lo; t < hi; ++t) {
      double v = 1.0;
      if (t - lo < ramp) v = 0.5 * (1.0 - std::cos(std::numbers::pi * (t - lo + 0.5) / ramp));
      if (hi - 1 - t < ramp)
        v = std::min(v, 0.5 * (1.0 - std::cos(std::numbers::pi * (hi - t - 0.5) / ramp)));
      g(t) = v;
    }
  }
  return g;
}

Matrix frame_signal(const Vector& y, int frame_len, int hop) {
  if (frame_len < 1 || frame_len > y.size())
    throw ConfigError("frame_signal: frame_len must be in [1, T]");
  if (hop < 1 || hop > frame_len) throw ConfigError("frame_signal: 1 <= hop <= frame_len");
  const int n_frames = static_cast<int>((y.size() - frame_len) / hop) + 1;
  Matrix frames(frame_len, n_frames);
  for (int n = 0; n < n_frames; ++n) frames.col(n) = y.segment(n * hop, frame_len);
  return frames;
}

RealizationSet gen_notes(const NotesSpec& spec) {
  spec.validate();
  const int N = spec.frames();
  const Vector g1 = notes_envelope(spec, 0);
  const Vector g2 = notes_envelope(spec, 1);
  const double freqs[2] = {spec.f1, spec.f2};
  const Vector* envs[2] = {&g1, &g2};

  Matrix stacked(spec.frame_len, static_cast<Eigen::Index>(N) * spec.S);
  Vector y(spec.T);
  for (int s = 0; s < spec.S; ++s) {
    Rng rng(split_seed(spec.seed, static_cast<std::uint64_t>(s)));
    const double phases[2] = {kTwoPi * rng.uniform(), kTwoPi * rng.uniform()};
    y.setZero();
    for (int i = 0; i < 2; ++i) {
      const double w = kTwoPi * freqs[i] / spec.f0;
      for (int r = 1; r <= spec.R; ++r) {
        const double amp = std::pow(0.5, r);
        for (int t = 0; t < spec.T; ++t)
          y(t) += amp * std::cos(r * (w * t + phases[i])) * (*envs[i])(t);
      }
    }
    stacked.block(0, static_cast<Eigen::Index>(s) * N, spec.frame_len, N) =
        frame_signal(y, spec.frame_len, spec.hop);
  }
  return RealizationSet(std::move(stacked), N, spec.S);
}

}  // namespace tlnmf
