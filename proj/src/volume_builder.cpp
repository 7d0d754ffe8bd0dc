#include "camfse/volume_builder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "camfse/error.hpp"

namespace camfse {

ExtrapolationVolume::ExtrapolationVolume(int m, int n, int p, int center)
    : M(m), N(n), P(p), center_layer(center) {
  if (m <= 0 || n <= 0 || p <= 0) throw ConfigError("volume dimensions must be positive");
  if (center < 0 || center >= p) throw ConfigError("center layer outside the volume");
  const auto count = static_cast<std::size_t>(m) * static_cast<std::size_t>(n) *
                     static_cast<std::size_t>(p);
  layers.resize(static_cast<std::size_t>(p));
  samples.assign(count, 0.0);
  status.assign(count, SampleStatus::unavailable);
}

double omega(double error, double omega_max, double t_e) {
  if (error < t_e) return omega_max * (1.0 - error / t_e);
  return 0.0;
}

namespace {

const MotionEstimate* find_estimate(std::span<const MotionEstimate> estimates, int kappa) {
  for (const auto& e : estimates)
    if (e.kappa == kappa) return &e;
  return nullptr;
}

}  // namespace

ExtrapolationVolume extract_volume(const VideoSequence& seq, const LossMask& mask, int frame,
                                   BlockCoord block, std::span<const MotionEstimate> estimates,
                                   const VolumeGeometry& geometry, Component component) {
  if (!mask.contains(frame, block)) throw DataError("block out of range");
  if (mask.state(frame, block) != BlockState::lost)
    throw DataError("volume requested for a block that is not lost");
  const int scale = component == Component::luma ? 1 : 2;
  if (geometry.block_size * scale != mask.block_size())
    throw ConfigError("volume block size does not match the mask block size");
  if (geometry.border < 0 || geometry.n_prev < 0 || geometry.n_follow < 0)
    throw ConfigError("negative volume geometry");

  const int side = geometry.side();
  ExtrapolationVolume vol(side, side, geometry.layers(), geometry.n_prev);
  const int bs = geometry.block_size;
  vol.origin_x = block.bx * bs - geometry.border;
  vol.origin_y = block.by * bs - geometry.border;
  vol.aligned = all_reliable(estimates);

  const int width = seq.width() / scale;
  const int height = seq.height() / scale;
  for (int p = 0; p < vol.P; ++p) {
    const int kappa = p - vol.center_layer;
    const int t = frame + kappa;
    if (t < 0 || t >= seq.frame_count()) continue;

    LayerSource& src = vol.layers[static_cast<std::size_t>(p)];
    src.frame = t;
    if (kappa != 0 && vol.aligned)
      if (const auto* e = find_estimate(estimates, kappa)) src.shift = e->vector;

    const Plane& plane = plane_of(seq.frame(t), component);
    if (plane.empty()) throw DataError("sequence has no chroma planes");
    for (int n = 0; n < vol.N; ++n) {
      for (int m = 0; m < vol.M; ++m) {
        const int x = vol.origin_x + m + src.shift.dx;
        const int y = vol.origin_y + n + src.shift.dy;
        const std::size_t i = vol.index(m, n, p);
        if (kappa == 0 && m >= geometry.border && m < geometry.border + bs &&
            n >= geometry.border && n < geometry.border + bs) {
          vol.status[i] = SampleStatus::loss;
          vol.samples[i] = 0.0;
          continue;
        }
        vol.samples[i] = plane.clamped(x, y);
        if (x < 0 || y < 0 || x >= width || y >= height) {
          vol.status[i] = SampleStatus::unavailable;
          continue;
        }
        switch (mask.pixel_state(t, x * scale, y * scale)) {
          case BlockState::intact: vol.status[i] = SampleStatus::support; break;
          case BlockState::concealed: vol.status[i] = SampleStatus::concealed; break;
          case BlockState::lost: vol.status[i] = SampleStatus::unavailable; break;
        }
      }
    }
  }
  return vol;
}

std::vector<double> layer_factors(const ExtrapolationVolume& vol,
                                  std::span<const MotionEstimate> estimates,
                                  const WeightConfig& config) {
  std::vector<double> factors(static_cast<std::size_t>(vol.P), 1.0);
  if (config.weighting == Weighting::fixed) return factors;
  for (int p = 0; p < vol.P; ++p) {
    const int kappa = p - vol.center_layer;
    double f = config.omega_max;
    if (kappa != 0)
      if (const auto* e = find_estimate(estimates, kappa))
        f = omega(e->error, config.omega_max, config.t_e);
    factors[static_cast<std::size_t>(p)] = f;
  }
  return factors;
}

WeightVolume build_weights(const ExtrapolationVolume& vol, std::span<const double> factors,
                           double rho_hat, double delta) {
  if (factors.size() != static_cast<std::size_t>(vol.P))
    throw ConfigError("one layer factor per volume layer is required");
  if (!(rho_hat > 0.0 && rho_hat <= 1.0)) throw ConfigError("rho_hat must lie in (0,1]");

  WeightVolume w{vol.M, vol.N, vol.P, std::vector<double>(vol.size(), 0.0),
                 std::vector<double>(factors.begin(), factors.end())};
  const double cm = (vol.M - 1) / 2.0;
  const double cn = (vol.N - 1) / 2.0;
  bool any = false;
  for (int p = 0; p < vol.P; ++p) {
    const double dp = p - vol.center_layer;
    for (int n = 0; n < vol.N; ++n) {
      for (int m = 0; m < vol.M; ++m) {
        const std::size_t i = vol.index(m, n, p);
        const SampleStatus s = vol.status[i];
        if (s == SampleStatus::loss || s == SampleStatus::unavailable) continue;
        const double dist = std::sqrt((m - cm) * (m - cm) + (n - cn) * (n - cn) + dp * dp);
        double value = factors[static_cast<std::size_t>(p)] * std::pow(rho_hat, dist);
        if (s == SampleStatus::concealed) value *= delta;
        w.weights[i] = value;
        any = any || value > 0.0;
      }
    }
  }
  if (!any) throw NoSupportError("weighting volume has no positive weight");
  return w;
}

WeightVolume build_weights(const ExtrapolationVolume& vol,
                           std::span<const MotionEstimate> estimates, const WeightConfig& config) {
  const auto factors = layer_factors(vol, estimates, config);
  return build_weights(vol, factors, config.rho_hat, config.delta);
}

void dump_volume(const ExtrapolationVolume& vol, const WeightVolume& weights,
                 const std::filesystem::path& base) {
  auto txt_path = base;
  txt_path += ".txt";
  auto bin_path = base;
  bin_path += ".bin";

  std::ofstream txt(txt_path, std::ios::trunc);
  if (!txt) throw DataError("cannot open " + txt_path.string());
  txt << "M " << vol.M << "\nN " << vol.N << "\nP " << vol.P << "\ncenter_layer "
      << vol.center_layer << "\norigin " << vol.origin_x << ' ' << vol.origin_y
      << "\naligned " << (vol.aligned ? 1 : 0) << '\n';
  for (int p = 0; p < vol.P; ++p) {
    const auto& l = vol.layers[static_cast<std::size_t>(p)];
    txt << "layer " << p << " frame " << l.frame << " shift " << l.shift.dx << ' '
        << l.shift.dy << " factor " << weights.layer_factors[static_cast<std::size_t>(p)]
        << '\n';
  }
  txt << "payload samples:f64 weights:f64 status:u8 order:p,n,m\n";

  std::ofstream bin(bin_path, std::ios::binary | std::ios::trunc);
  if (!bin) throw DataError("cannot open " + bin_path.string());
  bin.write(reinterpret_cast<const char*>(vol.samples.data()),
            static_cast<std::streamsize>(vol.samples.size() * sizeof(double)));
  bin.write(reinterpret_cast<const char*>(weights.weights.data()),
            static_cast<std::streamsize>(weights.weights.size() * sizeof(double)));
  bin.write(reinterpret_cast<const char*>(vol.status.data()),
            static_cast<std::streamsize>(vol.status.size()));
  if (!txt || !bin) throw DataError("write failure in volume dump");
}

}  // namespace camfse
