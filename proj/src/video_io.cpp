#include "camfse/video_io.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <string>

#include "camfse/error.hpp"

namespace camfse {

Plane::Plane(int width, int height, std::uint8_t fill)
    : width_(width), height_(height) {
  if (width < 0 || height < 0) throw DataError("negative plane dimensions");
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
               fill);
}

std::uint8_t Plane::clamped(int x, int y) const {
  x = std::clamp(x, 0, width_ - 1);
  y = std::clamp(y, 0, height_ - 1);
  return data_[index(x, y)];
}

const Frame& VideoSequence::frame(int t) const {
  if (t < 0 || t >= frame_count())
    throw std::out_of_range("frame index " + std::to_string(t) + " out of range");
  return frames_[static_cast<std::size_t>(t)];
}

Frame& VideoSequence::frame(int t) {
  if (t < 0 || t >= frame_count())
    throw std::out_of_range("frame index " + std::to_string(t) + " out of range");
  return frames_[static_cast<std::size_t>(t)];
}

void VideoSequence::push_back(Frame frame) {
  if (frame.luma.width() != width_ || frame.luma.height() != height_)
    throw DataError("frame geometry does not match sequence");
  if (frame.has_chroma() &&
      (frame.cb.width() != width_ / 2 || frame.cb.height() != height_ / 2 ||
       frame.cr.width() != width_ / 2 || frame.cr.height() != height_ / 2))
    throw DataError("chroma geometry does not match sequence");
  frames_.push_back(std::move(frame));
}

Frame VideoSequence::make_frame(std::uint8_t luma, std::uint8_t chroma) const {
  return Frame{Plane(width_, height_, luma), Plane(width_ / 2, height_ / 2, chroma),
               Plane(width_ / 2, height_ / 2, chroma)};
}

std::size_t i420_frame_bytes(int width, int height) {
  const auto w = static_cast<std::size_t>(width);
  const auto h = static_cast<std::size_t>(height);
  return w * h + 2 * (w / 2) * (h / 2);
}

VideoSequence load_sequence(const std::filesystem::path& path, int width,
                            int height, int max_frames) {
  if (width <= 0 || height <= 0) throw DataError("zero or negative frame dimensions");
  if (width % 2 != 0 || height % 2 != 0)
    throw DataError("I420 requires even frame dimensions");

  std::error_code ec;
  const auto file_size = std::filesystem::file_size(path, ec);
  if (ec) throw DataError("cannot stat " + path.string() + ": " + ec.message());

  const std::size_t frame_bytes = i420_frame_bytes(width, height);
  if (file_size % frame_bytes != 0)
    throw DataError(path.string() + ": size " + std::to_string(file_size) +
                    " is not a multiple of the frame size " +
                    std::to_string(frame_bytes) + " (truncated file?)");

  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());

  const auto available = static_cast<long long>(file_size / frame_bytes);
  const auto count = static_cast<int>(
      std::min<long long>(available, std::max(0, max_frames)));

  VideoSequence seq(width, height);
  for (int t = 0; t < count; ++t) {
    Frame f = seq.make_frame();
    for (Plane* plane : {&f.luma, &f.cb, &f.cr}) {
      auto& d = plane->data();
      in.read(reinterpret_cast<char*>(d.data()), static_cast<std::streamsize>(d.size()));
      if (!in) throw DataError("read failure in " + path.string());
    }
    seq.push_back(std::move(f));
  }
  return seq;
}

void save_sequence(const VideoSequence& seq, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  const Plane neutral(seq.width() / 2, seq.height() / 2, 128);
  for (const Frame& f : seq.frames()) {
    const Plane& cb = f.has_chroma() ? f.cb : neutral;
    const Plane& cr = f.has_chroma() ? f.cr : neutral;
    for (const Plane* plane : {&f.luma, &cb, &cr}) {
      const auto& d = plane->data();
      out.write(reinterpret_cast<const char*>(d.data()),
                static_cast<std::streamsize>(d.size()));
    }
  }
  out.flush();
  if (!out) throw DataError("write failure in " + path.string());
}

std::uint8_t sample(const VideoSequence& seq, int x, int y, int t) {
  return seq.frame(t).luma.clamped(x, y);
}

}  // namespace camfse
