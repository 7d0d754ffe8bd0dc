#include "camfse/motion_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include "camfse/error.hpp"

namespace camfse {

SupportRing build_support_ring(const LossMask& mask, int frame, BlockCoord block, int width) {
  if (width <= 0) throw ConfigError("ring width must be positive");
  if (!mask.contains(frame, block)) throw DataError("block out of range");

  const int bs = mask.block_size();
  const int x0 = block.bx * bs;
  const int y0 = block.by * bs;
  const auto& g = mask.geometry();

  SupportRing ring{frame, block, width, {}};
  for (int y = std::max(0, y0 - width); y < std::min(g.height, y0 + bs + width); ++y) {
    for (int x = std::max(0, x0 - width); x < std::min(g.width, x0 + bs + width); ++x) {
      if (x >= x0 && x < x0 + bs && y >= y0 && y < y0 + bs) continue;
      if (mask.pixel_state(frame, x, y) == BlockState::lost) continue;
      ring.pixels.push_back({x, y});
    }
  }
  if (ring.pixels.empty())
    throw EmptyRingError("block (" + std::to_string(block.bx) + "," +
                         std::to_string(block.by) + ") of frame " + std::to_string(frame) +
                         " has no usable surrounding samples");
  return ring;
}

double MatchScore::rmse() const {
  if (count <= 0) return std::numeric_limits<double>::infinity();
  return std::sqrt(static_cast<double>(ssd) / static_cast<double>(count));
}

MatchScore match_score(const VideoSequence& seq, const LossMask& mask, const SupportRing& ring,
                       int kappa, Displacement candidate) {
  const int ref_t = ring.frame + kappa;
  const Plane& cur = seq.frame(ring.frame).luma;
  const Plane& ref = seq.frame(ref_t).luma;
  const int w = ref.width();
  const int h = ref.height();

  MatchScore score;
  for (const Pixel& p : ring.pixels) {
    const int rx = std::clamp(p.x + candidate.dx, 0, w - 1);
    const int ry = std::clamp(p.y + candidate.dy, 0, h - 1);
    if (mask.pixel_state(ref_t, rx, ry) == BlockState::lost) continue;
    const int diff = static_cast<int>(cur.at(p.x, p.y)) - static_cast<int>(ref.at(rx, ry));
    score.ssd += diff * diff;
    ++score.count;
  }
  return score;
}

namespace {

bool usable(const MatchScore& s, std::size_t ring_size) {
  return s.valid() && 2 * static_cast<std::size_t>(s.count) >= ring_size;
}

// a.ssd/a.count < b.ssd/b.count without rounding.
bool lower_error(const MatchScore& a, const MatchScore& b) {
  return static_cast<std::int64_t>(a.ssd) * b.count < static_cast<std::int64_t>(b.ssd) * a.count;
}

bool equal_error(const MatchScore& a, const MatchScore& b) {
  return static_cast<std::int64_t>(a.ssd) * b.count == static_cast<std::int64_t>(b.ssd) * a.count;
}

bool preferred_on_tie(Displacement a, Displacement b) {
  const int la = std::abs(a.dx) + std::abs(a.dy);
  const int lb = std::abs(b.dx) + std::abs(b.dy);
  if (la != lb) return la < lb;
  if (a.dy != b.dy) return a.dy < b.dy;
  return a.dx < b.dx;
}

}  // namespace

double match_error(const VideoSequence& seq, const LossMask& mask, const SupportRing& ring,
                   int kappa, Displacement candidate) {
  if (ring.pixels.empty()) throw EmptyRingError("empty matching area");
  const MatchScore s = match_score(seq, mask, ring, kappa, candidate);
  if (!usable(s, ring.size())) return std::numeric_limits<double>::infinity();
  return s.rmse();
}

MotionEstimate estimate_motion(const VideoSequence& seq, const LossMask& mask,
                               const SupportRing& ring, int kappa, int d_max) {
  if (ring.pixels.empty()) throw EmptyRingError("empty matching area");
  if (d_max < 0) throw ConfigError("d_max must be non-negative");
  if (kappa == 0) throw ConfigError("kappa must be non-zero");
  const int ref_t = ring.frame + kappa;
  if (ref_t < 0 || ref_t >= seq.frame_count())
    throw DataError("reference frame " + std::to_string(ref_t) + " does not exist");

  bool found = false;
  MatchScore best;
  Displacement best_vec;
  for (int dy = -d_max; dy <= d_max; ++dy) {
    for (int dx = -d_max; dx <= d_max; ++dx) {
      const Displacement cand{dx, dy};
      const MatchScore s = match_score(seq, mask, ring, kappa, cand);
      if (!usable(s, ring.size())) continue;
      if (!found || lower_error(s, best) ||
          (equal_error(s, best) && preferred_on_tie(cand, best_vec))) {
        found = true;
        best = s;
        best_vec = cand;
      }
    }
  }

  MotionEstimate est;
  est.kappa = kappa;
  if (found) {
    est.vector = best_vec;
    est.error = best.rmse();
  } else {
    est.error = std::numeric_limits<double>::infinity();
  }
  return est;
}

MotionEstimate estimate_motion(const VideoSequence& seq, const LossMask& mask, int frame,
                               BlockCoord block, int kappa, int d_max, int ring_width) {
  const SupportRing ring = build_support_ring(mask, frame, block, ring_width);
  return estimate_motion(seq, mask, ring, kappa, d_max);
}

bool homogeneous(double error, double best_error, double t_rel) {
  return error <= t_rel * std::max(best_error, 1.0);
}

std::vector<MotionEstimate> assess_reliability(std::span<const MotionEstimate> estimates,
                                               double t_abs, double t_rel) {
  std::vector<MotionEstimate> out(estimates.begin(), estimates.end());
  if (out.empty()) return out;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : out) best = std::min(best, e.error);
  for (auto& e : out) e.reliable = e.error <= t_abs && homogeneous(e.error, best, t_rel);
  return out;
}

bool all_reliable(std::span<const MotionEstimate> estimates) {
  return !estimates.empty() &&
         std::all_of(estimates.begin(), estimates.end(),
                     [](const MotionEstimate& e) { return e.reliable; });
}

}  // namespace camfse
