#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "camfse/video_io.hpp"

namespace camfse {

inline constexpr int kDefaultBlockSize = 16;

enum class BlockState : std::uint8_t { intact, lost, concealed };

struct BlockCoord {
  int bx = 0;
  int by = 0;
  friend auto operator<=>(const BlockCoord&, const BlockCoord&) = default;
};

/// Frame geometry a mask is defined over.
struct MaskGeometry {
  int width = 0;
  int height = 0;
  int frame_count = 0;
  int block_size = kDefaultBlockSize;

  static MaskGeometry of(const VideoSequence& seq, int block_size = kDefaultBlockSize) {
    return {seq.width(), seq.height(), seq.frame_count(), block_size};
  }
  friend bool operator==(const MaskGeometry&, const MaskGeometry&) = default;
};

/// Per-frame grid of block states. Transitions are intact->lost (while the
/// mask is being built) and lost->concealed (during concealment).
class LossMask {
 public:
  LossMask() = default;
  explicit LossMask(const MaskGeometry& geometry);

  const MaskGeometry& geometry() const { return geometry_; }
  int block_size() const { return geometry_.block_size; }
  int blocks_x() const { return blocks_x_; }
  int blocks_y() const { return blocks_y_; }
  int frame_count() const { return geometry_.frame_count; }

  bool contains(int t, BlockCoord b) const {
    return t >= 0 && t < frame_count() && b.bx >= 0 && b.by >= 0 && b.bx < blocks_x_ &&
           b.by < blocks_y_;
  }

  BlockState state(int t, BlockCoord b) const;

  /// State of the block covering luma sample (x,y) of frame t.
  BlockState pixel_state(int t, int x, int y) const {
    return states_[offset(t, {x / geometry_.block_size, y / geometry_.block_size})];
  }

  void mark_lost(int t, BlockCoord b);
  /// Throws DataError unless the block is currently lost.
  void mark_concealed(int t, BlockCoord b);

  /// Blocks that are lost or concealed (everything that was ever damaged).
  int damaged_count() const;
  int lost_count() const;
  int lost_count(int t) const;

  bool matches(const VideoSequence& seq) const;

  friend bool operator==(const LossMask&, const LossMask&) = default;

 private:
  std::size_t offset(int t, BlockCoord b) const {
    return (static_cast<std::size_t>(t) * static_cast<std::size_t>(blocks_y_) +
            static_cast<std::size_t>(b.by)) *
               static_cast<std::size_t>(blocks_x_) +
           static_cast<std::size_t>(b.bx);
  }
  void check(int t, BlockCoord b) const;

  MaskGeometry geometry_{};
  int blocks_x_ = 0;
  int blocks_y_ = 0;
  std::vector<BlockState> states_;
};

/// Isolated losses: block (bx,by) of every listed frame is lost iff
/// (bx+by) mod 2 == parity.
LossMask checkerboard_mask(std::span<const int> frames, int parity,
                           const MaskGeometry& geometry);

/// Consecutive losses: whole block rows with by mod 2 == phase are lost.
LossMask slice_mask(std::span<const int> frames, int phase, const MaskGeometry& geometry);

enum class LossPlanes { luma, all };

/// Overwrites every sample of lost blocks with `fill`. With LossPlanes::all the
/// co-located half-size chroma blocks are blanked as well.
VideoSequence apply_loss(const VideoSequence& seq, const LossMask& mask,
                         std::uint8_t fill = 0, LossPlanes planes = LossPlanes::luma);

/// Lost blocks of frame t in raster order.
std::vector<BlockCoord> concealment_order(const LossMask& mask, int t);

/// Parses frame selections such as `5..200:5` (inclusive range with step),
/// `7`, or comma-separated combinations of both. Result is sorted and unique.
std::vector<int> parse_frame_list(std::string_view text);

/// Text mask format: one `frame bx by` line per damaged block, sorted, `#`
/// starts a comment.
void write_mask(const LossMask& mask, std::ostream& out);
void write_mask(const LossMask& mask, const std::filesystem::path& path);
LossMask read_mask(std::istream& in, const MaskGeometry& geometry);
LossMask read_mask(const std::filesystem::path& path, const MaskGeometry& geometry);

}  // namespace camfse
