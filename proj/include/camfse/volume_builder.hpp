#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "camfse/loss_model.hpp"
#include "camfse/motion_estimation.hpp"
#include "camfse/video_io.hpp"

namespace camfse {

enum class SampleStatus : std::uint8_t { support, loss, concealed, unavailable };

/// Shape of the extrapolation volume around one lost block.
struct VolumeGeometry {
  int block_size = kDefaultBlockSize;
  int border = 16;
  int n_prev = 2;
  int n_follow = 0;

  int side() const { return block_size + 2 * border; }
  int layers() const { return n_prev + n_follow + 1; }
};

/// Where layer p of the volume was read from.
struct LayerSource {
  int frame = -1;  // -1 when the frame lies outside the sequence
  Displacement shift;
  bool available() const { return frame >= 0; }
};

/// M x N x P cube of samples centered on a lost block. m runs along x, n along
/// y; layer `center_layer` is the damaged frame itself.
struct ExtrapolationVolume {
  int M = 0;
  int N = 0;
  int P = 0;
  int center_layer = 0;
  int origin_x = 0;  // frame position of (m,n) = (0,0) in the damaged frame
  int origin_y = 0;
  bool aligned = false;
  std::vector<LayerSource> layers;
  std::vector<double> samples;
  std::vector<SampleStatus> status;

  ExtrapolationVolume() = default;
  ExtrapolationVolume(int m, int n, int p, int center);

  std::size_t size() const { return samples.size(); }
  std::size_t index(int m, int n, int p) const {
    return (static_cast<std::size_t>(p) * static_cast<std::size_t>(N) +
            static_cast<std::size_t>(n)) *
               static_cast<std::size_t>(M) +
           static_cast<std::size_t>(m);
  }
};

struct WeightVolume {
  int M = 0;
  int N = 0;
  int P = 0;
  std::vector<double> weights;
  /// Per-layer factor that multiplied the spatial decay.
  std::vector<double> layer_factors;

  std::size_t index(int m, int n, int p) const {
    return (static_cast<std::size_t>(p) * static_cast<std::size_t>(N) +
            static_cast<std::size_t>(n)) *
               static_cast<std::size_t>(M) +
           static_cast<std::size_t>(m);
  }
  double at(int m, int n, int p) const { return weights[index(m, n, p)]; }
};

enum class Weighting { content_adaptive, fixed };

struct WeightConfig {
  double rho_hat = 0.8;
  double omega_max = 0.675;
  double t_e = 84.375;
  double delta = 0.2;
  Weighting weighting = Weighting::content_adaptive;
};

/// Linear ramp from omega_max at zero error down to 0 at t_e.
double omega(double error, double omega_max, double t_e);

/// Cuts the volume for `block` of `frame` out of the (partially concealed)
/// buffer. Layer p reads frame frame+p-n_prev, shifted by the estimate for
/// that offset when every estimate is reliable and unshifted otherwise.
/// Samples outside the frame, in frames outside the sequence or in still-lost
/// blocks are unavailable. For a chroma component the geometry and the motion
/// vectors are expected at chroma resolution (block_size half the mask's).
ExtrapolationVolume extract_volume(const VideoSequence& seq, const LossMask& mask, int frame,
                                   BlockCoord block, std::span<const MotionEstimate> estimates,
                                   const VolumeGeometry& geometry,
                                   Component component = Component::luma);

/// Per-layer Omega: the damaged layer gets omega_max, reference layers
/// omega(error). Fixed weighting uses 1 everywhere. A reference layer without
/// an estimate keeps omega_max.
std::vector<double> layer_factors(const ExtrapolationVolume& vol,
                                  std::span<const MotionEstimate> estimates,
                                  const WeightConfig& config);

/// rho[m,n,p] = factor[p] * rho_hat^distance-to-center, times delta on
/// concealed samples, zero on loss and unavailable samples.
/// Throws NoSupportError if every weight is zero.
WeightVolume build_weights(const ExtrapolationVolume& vol, std::span<const double> factors,
                           double rho_hat, double delta);

WeightVolume build_weights(const ExtrapolationVolume& vol,
                           std::span<const MotionEstimate> estimates, const WeightConfig& config);

/// Writes `<base>.txt` (dimensions, origin, layer map) and `<base>.bin`
/// (float64 samples, float64 weights, uint8 status; layer-major, rows, columns).
void dump_volume(const ExtrapolationVolume& vol, const WeightVolume& weights,
                 const std::filesystem::path& base);

}  // namespace camfse
