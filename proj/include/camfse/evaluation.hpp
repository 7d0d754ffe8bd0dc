#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "camfse/loss_model.hpp"
#include "camfse/pipeline.hpp"
#include "camfse/video_io.hpp"

namespace camfse {

/// Luma PSNR accumulated over every damaged (lost or concealed) block of the
/// mask. Returns +inf for an exact reconstruction.
/// Throws DataError for an empty mask or mismatched geometry.
double psnr_blocks(const VideoSequence& original, const VideoSequence& concealed,
                   const LossMask& mask);

struct TrainingPair {
  double error = 0.0;       // representative motion estimation error
  double best_omega = 0.0;  // reference-layer factor with the best block PSNR
};

/// {0.0, 0.05, ..., 1.5}
std::vector<double> default_omega_grid();

/// Conceals `block` once per grid value, with that value as the factor of
/// every reference layer, and keeps the value with the highest block PSNR
/// against `original` (ties go to the larger value). The paired error is the
/// mean over reliable estimates, or over all finite estimates if none is
/// reliable.
TrainingPair best_weight_search(const VideoSequence& buffer, const VideoSequence& original,
                                const LossMask& mask, int frame, BlockCoord block,
                                const ConcealConfig& config, std::span<const double> omega_grid);

struct WeightModel {
  double omega_max = 0.0;
  double t_e = 0.0;
  double intercept = 0.0;
  double slope = 0.0;
};

/// Ordinary least squares omega ~ a + b*error; omega_max = a, t_e = -a/b.
/// Throws DegenerateFitError when fewer than two distinct errors are given or
/// the fitted line is not decreasing with a positive intercept.
WeightModel fit_weight_model(std::span<const TrainingPair> pairs);

void write_pairs_csv(std::span<const TrainingPair> pairs, std::ostream& out);
void write_pairs_csv(std::span<const TrainingPair> pairs, const std::filesystem::path& path);

struct NamedMask {
  std::string name;
  LossMask mask;
};

struct ComparisonRow {
  std::string mask;
  Mode mode = Mode::content_adaptive;
  int blocks = 0;
  double psnr = 0.0;  // capped at kPsnrCap
};

struct GainRow {
  Mode better = Mode::content_adaptive;
  Mode baseline = Mode::fixed_weighting;
  double mean_gain = 0.0;  // mean over masks of psnr(better) - psnr(baseline)
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
  std::vector<GainRow> gains;
};

/// Corrupts `original` with each mask, conceals it with each mode and
/// tabulates PSNR over the lost blocks, plus the mean gain of every mode over
/// each mode listed after it.
ComparisonTable run_comparison(const VideoSequence& original, std::span<const NamedMask> masks,
                               std::span<const Mode> modes, const ConcealConfig& config);

/// kind,mask,mode,blocks,psnr_db with kind = result | gain.
void write_comparison_csv(const ComparisonTable& table, std::ostream& out);

}  // namespace camfse
