#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "camfse/loss_model.hpp"
#include "camfse/video_io.hpp"

namespace camfse {

struct Displacement {
  int dx = 0;
  int dy = 0;
  friend bool operator==(const Displacement&, const Displacement&) = default;
};

/// Motion of a lost block from frame tau to frame tau+kappa.
struct MotionEstimate {
  int kappa = 0;
  Displacement vector;
  /// Root-mean-square luma difference over the matching area for `vector`.
  double error = 0.0;
  bool reliable = false;
};

struct Pixel {
  int x = 0;
  int y = 0;
};

/// Area of usable samples framing a lost block in its own frame.
struct SupportRing {
  int frame = 0;
  BlockCoord block;
  int width = 0;
  std::vector<Pixel> pixels;

  std::size_t size() const { return pixels.size(); }
};

/// Collects the samples within `width` of the block's bounding box that are
/// inside the frame and not part of a still-lost block (concealed blocks are
/// usable). Throws EmptyRingError if nothing is left.
SupportRing build_support_ring(const LossMask& mask, int frame, BlockCoord block, int width);

/// Exact matching statistics for one candidate. `count` is the number of ring
/// samples whose shifted reference position is usable.
struct MatchScore {
  std::int64_t ssd = 0;
  std::int64_t count = 0;

  bool valid() const { return count > 0; }
  double rmse() const;
};

/// Score of one candidate. Shifted reads use edge replication; reference
/// samples that fall into still-lost blocks of frame tau+kappa are skipped.
MatchScore match_score(const VideoSequence& seq, const LossMask& mask, const SupportRing& ring,
                       int kappa, Displacement candidate);

/// RMS difference between the ring in frame tau and the ring shifted by
/// `candidate` in frame tau+kappa. Returns +inf when fewer than half of the
/// ring samples have a usable reference sample.
double match_error(const VideoSequence& seq, const LossMask& mask, const SupportRing& ring,
                   int kappa, Displacement candidate);

/// Exhaustive integer search over |dx|,|dy| <= d_max. Ties are broken by the
/// smaller |dx|+|dy|, then the smaller dy, then the smaller dx.
MotionEstimate estimate_motion(const VideoSequence& seq, const LossMask& mask,
                               const SupportRing& ring, int kappa, int d_max);

MotionEstimate estimate_motion(const VideoSequence& seq, const LossMask& mask, int frame,
                               BlockCoord block, int kappa, int d_max, int ring_width = 4);

/// Cross-frame homogeneity: an error is acceptable if it is within `t_rel`
/// times the best error of the set (the best error floored at 1).
bool homogeneous(double error, double best_error, double t_rel);

/// Sets `reliable` on each estimate: error <= t_abs and homogeneous.
std::vector<MotionEstimate> assess_reliability(std::span<const MotionEstimate> estimates,
                                               double t_abs, double t_rel);

/// True when the set is non-empty and every member is reliable.
bool all_reliable(std::span<const MotionEstimate> estimates);

}  // namespace camfse
