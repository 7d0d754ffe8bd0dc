#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "camfse/camfse.hpp"

namespace camfse::testing {

/// Box-blurred uniform noise: textured enough for unique block matches.
/// The returned field is `width x height` doubles in [0,255].
inline std::vector<double> texture(int width, int height, unsigned seed, int radius = 1) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 255.0);
  std::vector<double> noise(static_cast<std::size_t>(width) * height);
  for (auto& v : noise) v = u(rng);
  std::vector<double> out(noise.size());
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      double s = 0.0;
      int n = 0;
      for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) {
          const int xx = std::clamp(x + dx, 0, width - 1);
          const int yy = std::clamp(y + dy, 0, height - 1);
          s += noise[static_cast<std::size_t>(yy) * width + xx];
          ++n;
        }
      out[static_cast<std::size_t>(y) * width + x] = s / n;
    }
  return out;
}

/// Smooth content: a few random low-frequency cosines around mid-gray.
inline std::vector<double> smooth_texture(int width, int height, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> f(0.01, 0.08), ph(0.0, 6.283185307179586);
  std::vector<double> out(static_cast<std::size_t>(width) * height, 128.0);
  for (int c = 0; c < 4; ++c) {
    const double fx = f(rng), fy = f(rng), p = ph(rng);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x)
        out[static_cast<std::size_t>(y) * width + x] +=
            25.0 * std::cos(2.0 * 3.141592653589793 * (fx * x + fy * y) + p);
  }
  return out;
}

inline std::uint8_t to_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

/// Frame t shows the window of `field` (size fw x fh) whose top-left corner is
/// (pad - t*sx, pad - t*sy): content moves by (sx,sy) per frame, so the
/// displacement of a block towards frame t+kappa is (kappa*sx, kappa*sy).
inline VideoSequence translating(const std::vector<double>& field, int fw, int width, int height,
                                 int frames, int sx, int sy, int pad) {
  VideoSequence seq(width, height);
  for (int t = 0; t < frames; ++t) {
    Frame f = seq.make_frame();
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        const int xx = x + pad - t * sx;
        const int yy = y + pad - t * sy;
        f.luma.at(x, y) = to_u8(field[static_cast<std::size_t>(yy) * fw + xx]);
      }
    seq.push_back(std::move(f));
  }
  return seq;
}

/// Sequence of `frames` identical copies of `field`.
inline VideoSequence static_sequence(const std::vector<double>& field, int width, int height,
                                     int frames) {
  return translating(field, width, width, height, frames, 0, 0, 0);
}

/// Random volume of the given shape: support everywhere except a lost
/// centre block, random samples and strictly positive random weights on the
/// support.
struct RandomInstance {
  ExtrapolationVolume vol;
  WeightVolume w;
};

inline RandomInstance random_instance(int M, int N, int P, int center, int hole, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> sample(0.0, 255.0), weight(0.05, 1.0);
  RandomInstance r{ExtrapolationVolume(M, N, P, center), {}};
  r.w.M = M;
  r.w.N = N;
  r.w.P = P;
  r.w.weights.assign(r.vol.size(), 0.0);
  r.w.layer_factors.assign(static_cast<std::size_t>(P), 1.0);
  const int m0 = (M - hole) / 2, n0 = (N - hole) / 2;
  for (int p = 0; p < P; ++p)
    for (int n = 0; n < N; ++n)
      for (int m = 0; m < M; ++m) {
        const auto i = r.vol.index(m, n, p);
        const bool lost = p == center && m >= m0 && m < m0 + hole && n >= n0 && n < n0 + hole;
        r.vol.status[i] = lost ? SampleStatus::loss : SampleStatus::support;
        r.vol.samples[i] = lost ? 0.0 : sample(rng);
        r.w.weights[i] = lost ? 0.0 : weight(rng);
      }
  return r;
}

}  // namespace camfse::testing
