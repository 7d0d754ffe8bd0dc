#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "camfse/fse_engine.hpp"
#include "camfse/loss_model.hpp"
#include "camfse/motion_estimation.hpp"
#include "camfse/video_io.hpp"
#include "camfse/volume_builder.hpp"

namespace camfse {

enum class Mode {
  content_adaptive,  // CA-MC-FSE
  fixed_weighting,   // MC-FSE
  temporal_copy,     // DMVE-style motion-compensated copy
};

std::string_view to_string(Mode mode);
/// Accepts ca-mc-fse, mc-fse, temporal-copy.
Mode parse_mode(std::string_view name);

/// Block whose luma volume, weights and pursuit trace are written to
/// `<prefix>.txt`, `<prefix>.bin` and `<prefix>_trace.csv`.
struct DebugTarget {
  int frame = 0;
  BlockCoord block;
  std::filesystem::path prefix;
};

struct ConcealConfig {
  int n_prev = 2;
  int n_follow = 0;
  int d_max = 16;
  int ring_width = 4;
  int block_size = kDefaultBlockSize;
  int border = 16;
  double t_abs = 10.0;
  double t_rel = 3.0;
  double omega_max = 0.675;
  double t_e = 84.375;
  double delta = 0.2;
  Mode mode = Mode::content_adaptive;
  FseConfig fse;
  /// Worker threads used for independent blocks of one frame.
  int threads = 1;
  /// Also conceal the chroma planes at half resolution, reusing the luma
  /// motion vectors.
  bool conceal_chroma = false;
  /// When set, every reference layer gets this factor and the damaged layer
  /// gets 1 (used by the weight training search).
  std::optional<double> reference_omega;
  std::optional<DebugTarget> debug;

  void validate() const;
  VolumeGeometry volume_geometry() const;
  WeightConfig weight_config() const;
};

/// Human-readable `key = value` listing of every field.
void print_config(const ConcealConfig& config, std::ostream& out);

/// Motion and weighting used for one layer of one concealed block.
struct LayerReport {
  int kappa = 0;
  Displacement vector;
  double error = 0.0;
  bool reliable = true;
  double omega = 0.0;  // NaN in temporal-copy mode
};

struct BlockReport {
  int frame = 0;
  BlockCoord block;
  bool aligned = false;
  /// No usable support: samples were copied from the nearest available ones.
  bool fallback_fill = false;
  std::vector<LayerReport> layers;
  std::optional<double> psnr;
};

struct ConcealedBlock {
  int frame = 0;
  BlockCoord block;
  std::vector<std::uint8_t> luma;  // block_size^2, row-major
  std::vector<std::uint8_t> cb;    // (block_size/2)^2 when chroma is concealed
  std::vector<std::uint8_t> cr;
  BlockReport report;
};

/// Runs motion estimation, reliability gating, volume extraction, weighting,
/// model generation and cut-out for one lost block. Nothing is written.
ConcealedBlock conceal_block(const VideoSequence& buffer, const LossMask& mask, int frame,
                             BlockCoord block, const ConcealConfig& config);

/// Writes the block into the buffer and marks it concealed.
void write_block(VideoSequence& buffer, LossMask& mask, const ConcealedBlock& block);

struct ConcealResult {
  VideoSequence video;
  LossMask mask;
  std::vector<BlockReport> report;
};

/// Conceals every lost block, frames in temporal order and blocks in raster
/// order. Blocks whose neighbourhoods do not depend on each other are run on
/// `config.threads` workers; the output does not depend on the thread count.
/// If `original` is given, each report row carries the block PSNR.
ConcealResult conceal_sequence(const VideoSequence& seq, const LossMask& mask,
                               const ConcealConfig& config,
                               const VideoSequence* original = nullptr);

/// Per-block PSNR written to CSV is capped at this value.
inline constexpr double kPsnrCap = 99.99;

/// frame,bx,by,kappa,dx,dy,err,reliable,omega,psnr; one line per layer.
void write_report_csv(const std::vector<BlockReport>& report, std::ostream& out);
void write_report_csv(const std::vector<BlockReport>& report, const std::filesystem::path& path);

}  // namespace camfse
