#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <vector>

namespace camfse {

/// One 8-bit sample plane stored row-major.
class Plane {
 public:
  Plane() = default;
  Plane(int width, int height, std::uint8_t fill = 0);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }

  std::uint8_t at(int x, int y) const { return data_[index(x, y)]; }
  std::uint8_t& at(int x, int y) { return data_[index(x, y)]; }

  /// Edge-replicating read: coordinates outside the plane are clamped.
  std::uint8_t clamped(int x, int y) const;

  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  std::vector<std::uint8_t>& data() { return data_; }
  const std::vector<std::uint8_t>& data() const { return data_; }

  friend bool operator==(const Plane&, const Plane&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// A frame of an I420 sequence. Chroma planes are half resolution in both
/// directions and may be absent for luma-only material.
struct Frame {
  Plane luma;
  Plane cb;
  Plane cr;

  bool has_chroma() const { return !cb.empty(); }
  friend bool operator==(const Frame&, const Frame&) = default;
};

enum class Component { luma, cb, cr };

inline const Plane& plane_of(const Frame& f, Component c) {
  return c == Component::luma ? f.luma : (c == Component::cb ? f.cb : f.cr);
}
inline Plane& plane_of(Frame& f, Component c) {
  return c == Component::luma ? f.luma : (c == Component::cb ? f.cb : f.cr);
}

/// Ordered planar 8-bit video v[x,y,t].
class VideoSequence {
 public:
  VideoSequence() = default;
  VideoSequence(int width, int height) : width_(width), height_(height) {}

  int width() const { return width_; }
  int height() const { return height_; }
  int frame_count() const { return static_cast<int>(frames_.size()); }

  const Frame& frame(int t) const;
  Frame& frame(int t);
  const std::vector<Frame>& frames() const { return frames_; }

  /// Appends a frame; its luma (and chroma, if present) must match the
  /// sequence geometry.
  void push_back(Frame frame);

  /// Creates a luma+chroma frame filled with constant values.
  Frame make_frame(std::uint8_t luma = 0, std::uint8_t chroma = 128) const;

  friend bool operator==(const VideoSequence&, const VideoSequence&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<Frame> frames_;
};

/// Bytes of one I420 frame with the given luma geometry.
std::size_t i420_frame_bytes(int width, int height);

/// Reads up to max_frames frames of headerless 8-bit I420.
/// Throws DataError on zero or odd dimensions, a file size that is not a
/// whole number of frames, or an unreadable file.
VideoSequence load_sequence(const std::filesystem::path& path, int width,
                            int height,
                            int max_frames = std::numeric_limits<int>::max());

/// Writes the sequence as headerless I420. Frames without chroma are written
/// with neutral (128) chroma.
void save_sequence(const VideoSequence& seq, const std::filesystem::path& path);

/// v[x,y,t] with edge replication for out-of-frame (x,y).
/// Throws std::out_of_range when t is not a valid frame index.
std::uint8_t sample(const VideoSequence& seq, int x, int y, int t);

}  // namespace camfse
