#pragma once

#include "tlnmf/types.hpp"

#include <utility>

namespace tlnmf {

/// Gaussian composite model: [Phi_bar Y]_{mn} ~ N(0, [W_bar H_bar]_{mn}) with
/// Gamma(a, theta) ground-truth factors and the type-II DCT as Phi_bar.
struct GcmSpec {
  int M = 10;
  int N = 50;
  int K_bar = 5;
  double a = 1.0;
  double theta = 2.0;
  int S = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Two synthetic music notes (fundamentals f1, f2, R harmonics each, random
/// per-realization phases), framed into an M x N matrix per realization.
struct NotesSpec {
  int T = 15000;        // samples
  double f0 = 5000.0;   // sampling rate, Hz
  double f1 = 440.0;    // A4
  double f2 = 466.16;   // A4#
  int R = 2;            // harmonics per note
  int frame_len = 200;  // M
  int hop = 100;
  int S = 1;
  std::uint64_t seed = 0;

  void validate() const;
  int frames() const { return (T - frame_len) / hop + 1; }
};

/// Orthonormal type-II DCT: [Phi]_{km} = c_k cos(pi (m + 1/2) k / M) with
/// c_0 = sqrt(1/M) and c_k = sqrt(2/M) for k > 0.
OrthogonalTransform dct2_matrix(int M);

/// Draws (W_bar, H_bar) from Rng(spec.seed) (W_bar column-major first, then
/// H_bar column-major), then realization s from Rng(split_seed(seed, s)) as
/// Y^(s) = Phi_bar^T X^(s), X^(s)_{mn} = sqrt([W_bar H_bar]_{mn}) * N(0,1)
/// drawn column-major. Identical specs give bit-identical output.
std::pair<RealizationSet, GroundTruth> gen_gcm(const GcmSpec& spec);

/// Fresh realizations for an existing ground truth (the per-S re-sampling of
/// the gap experiment); realization s uses Rng(split_seed(noise_seed, s)).
RealizationSet gen_gcm_realizations(const GcmSpec& spec, const GroundTruth& truth,
                                    std::uint64_t noise_seed);

/// Note 1 active on [0s, 1s) and [2s, 3s), note 2 on [1s, 3s), with 10 ms
/// raised-cosine ramps at every activity boundary. Realization s draws
/// theta_1 then theta_2 uniform on [0, 2pi) from Rng(split_seed(seed, s)).
RealizationSet gen_notes(const NotesSpec& spec);

/// The envelope of note i (0 or 1) over t = 0..T-1; exposed for tests.
Vector notes_envelope(const NotesSpec& spec, int note);

/// Frames a temporal signal into columns: column n holds samples
/// [n*hop, n*hop + frame_len). Rectangular analysis window.
Matrix frame_signal(const Vector& y, int frame_len, int hop);

}  // namespace tlnmf
