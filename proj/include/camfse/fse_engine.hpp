#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "camfse/volume_builder.hpp"

namespace camfse {

/// Size of the periodic transform grid the volume is embedded into.
struct TransformDims {
  int m = 64;
  int n = 64;
  int p = 16;

  std::size_t size() const {
    return static_cast<std::size_t>(m) * static_cast<std::size_t>(n) *
           static_cast<std::size_t>(p);
  }
  friend bool operator==(const TransformDims&, const TransformDims&) = default;
};

struct FseConfig {
  int iterations = 800;
  /// Orthogonality deficiency compensation applied to every coefficient update.
  double gamma = 0.7;
  TransformDims dims;
  /// Spatial decay of the weighting function.
  double rho_hat = 0.8;
  /// Keep the weighted residual energy after every iteration (costs one
  /// pass over the volume per iteration).
  bool track_energy = false;
  bool record_trace = false;

  /// Throws ConfigError on out-of-range values or a grid smaller than the volume.
  void validate(int M, int N, int P) const;
};

struct TraceRow {
  int iteration = 0;
  int bin = 0;
  double magnitude = 0.0;  // |delta c|
};

/// Expansion coefficients over the transform grid. The volume sample
/// (m,n,p) sits at grid position (m, n, (p - center_layer) mod dims.p), and
/// basis k is exp(j*2*pi*(km*m/Fm + kn*n/Fn + kp*q/Fp)), so the model is
/// g[m,n,p] = sum_k coeffs[k] * phi_k[m,n,p].
struct SpectralModel {
  TransformDims dims;
  int center_layer = 0;
  /// Linear index (kp*Fn + kn)*Fm + km.
  std::vector<std::complex<double>> coeffs;
  /// Representative bin chosen in each iteration (the lower linear index of
  /// a conjugate pair).
  std::vector<int> selections;
  int iterations_run = 0;
  /// Weighted residual energy before the first and after every iteration,
  /// filled only with FseConfig::track_energy.
  std::vector<double> energy;
  std::vector<TraceRow> trace;

  /// Bins with a non-zero accumulated coefficient, ascending.
  std::vector<int> selected_set() const;
};

struct VolumeCoord {
  int m = 0;
  int n = 0;
  int p = 0;
};

/// Linear grid index and its conjugate mirror.
int bin_index(const TransformDims& dims, int km, int kn, int kp);
int mirror_bin(const TransformDims& dims, int bin);

/// Weighted matching pursuit over the 3-D DFT basis, carried out on the
/// weighted residual spectrum: select the bin with the largest |R_w|^2,
/// add gamma*R_w[u]/W[0] (and its conjugate on the mirror bin), and subtract
/// the corresponding shifted weight spectrum from R_w.
/// Throws NoSupportError when the weights sum to zero.
SpectralModel generate_model_fast(const ExtrapolationVolume& vol, const WeightVolume& w,
                                  const FseConfig& cfg);

/// Same iteration computed directly on the spatial residual. Cost grows with
/// iterations * bins * volume, so use it on small volumes only.
SpectralModel generate_model_reference(const ExtrapolationVolume& vol, const WeightVolume& w,
                                       const FseConfig& cfg);

/// Real part of the model at the requested volume coordinates (unclamped).
std::vector<double> render_model(const SpectralModel& model, std::span<const VolumeCoord> region);

/// Full complex model over an M x N x P volume (diagnostics).
std::vector<std::complex<double>> render_complex(const SpectralModel& model, int M, int N, int P);

/// sum w * (f - g)^2 over the volume.
double weighted_residual_energy(const ExtrapolationVolume& vol, const WeightVolume& w,
                                const SpectralModel& model);

/// iteration,bin,km,kn,kp,magnitude
void write_trace_csv(const SpectralModel& model, const std::filesystem::path& path);

}  // namespace camfse
