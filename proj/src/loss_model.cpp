#include "camfse/loss_model.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>

#include "camfse/error.hpp"

namespace camfse {

LossMask::LossMask(const MaskGeometry& geometry) : geometry_(geometry) {
  if (geometry.block_size <= 0) throw ConfigError("block size must be positive");
  if (geometry.width <= 0 || geometry.height <= 0)
    throw DataError("mask geometry has zero dimensions");
  if (geometry.frame_count < 0) throw DataError("negative frame count");
  if (geometry.width % geometry.block_size != 0 || geometry.height % geometry.block_size != 0)
    throw DataError("frame size " + std::to_string(geometry.width) + "x" +
                    std::to_string(geometry.height) + " is not a multiple of block size " +
                    std::to_string(geometry.block_size));
  blocks_x_ = geometry.width / geometry.block_size;
  blocks_y_ = geometry.height / geometry.block_size;
  states_.assign(static_cast<std::size_t>(geometry.frame_count) *
                     static_cast<std::size_t>(blocks_x_) * static_cast<std::size_t>(blocks_y_),
                 BlockState::intact);
}

void LossMask::check(int t, BlockCoord b) const {
  if (t < 0 || t >= frame_count())
    throw DataError("frame index " + std::to_string(t) + " out of range");
  if (b.bx < 0 || b.by < 0 || b.bx >= blocks_x_ || b.by >= blocks_y_)
    throw DataError("block (" + std::to_string(b.bx) + "," + std::to_string(b.by) +
                    ") out of range");
}

BlockState LossMask::state(int t, BlockCoord b) const {
  check(t, b);
  return states_[offset(t, b)];
}

void LossMask::mark_lost(int t, BlockCoord b) {
  check(t, b);
  auto& s = states_[offset(t, b)];
  if (s == BlockState::concealed) throw DataError("cannot mark a concealed block as lost");
  s = BlockState::lost;
}

void LossMask::mark_concealed(int t, BlockCoord b) {
  check(t, b);
  auto& s = states_[offset(t, b)];
  if (s != BlockState::lost) throw DataError("only lost blocks can become concealed");
  s = BlockState::concealed;
}

int LossMask::damaged_count() const {
  return static_cast<int>(std::count_if(states_.begin(), states_.end(),
                                        [](BlockState s) { return s != BlockState::intact; }));
}

int LossMask::lost_count() const {
  return static_cast<int>(std::count(states_.begin(), states_.end(), BlockState::lost));
}

int LossMask::lost_count(int t) const {
  check(t, {0, 0});
  const auto first = states_.begin() + static_cast<std::ptrdiff_t>(offset(t, {0, 0}));
  return static_cast<int>(std::count(first, first + blocks_x_ * blocks_y_, BlockState::lost));
}

bool LossMask::matches(const VideoSequence& seq) const {
  return seq.width() == geometry_.width && seq.height() == geometry_.height &&
         seq.frame_count() == geometry_.frame_count;
}

namespace {

template <typename Predicate>
LossMask pattern_mask(std::span<const int> frames, const MaskGeometry& geometry,
                      Predicate lost) {
  LossMask mask(geometry);
  for (int t : frames) {
    if (t < 0 || t >= geometry.frame_count)
      throw DataError("frame index " + std::to_string(t) + " out of range");
    for (int by = 0; by < mask.blocks_y(); ++by)
      for (int bx = 0; bx < mask.blocks_x(); ++bx)
        if (lost(bx, by)) mask.mark_lost(t, {bx, by});
  }
  return mask;
}

void check_binary(int v, const char* what) {
  if (v != 0 && v != 1) throw ConfigError(std::string(what) + " must be 0 or 1");
}

}  // namespace

LossMask checkerboard_mask(std::span<const int> frames, int parity,
                           const MaskGeometry& geometry) {
  check_binary(parity, "parity");
  return pattern_mask(frames, geometry,
                      [parity](int bx, int by) { return (bx + by) % 2 == parity; });
}

LossMask slice_mask(std::span<const int> frames, int phase, const MaskGeometry& geometry) {
  check_binary(phase, "phase");
  return pattern_mask(frames, geometry, [phase](int, int by) { return by % 2 == phase; });
}

VideoSequence apply_loss(const VideoSequence& seq, const LossMask& mask, std::uint8_t fill,
                         LossPlanes planes) {
  if (!mask.matches(seq)) throw DataError("mask geometry does not match the sequence");
  VideoSequence out = seq;
  const int bs = mask.block_size();
  for (int t = 0; t < seq.frame_count(); ++t) {
    Frame& f = out.frame(t);
    for (int by = 0; by < mask.blocks_y(); ++by) {
      for (int bx = 0; bx < mask.blocks_x(); ++bx) {
        if (mask.state(t, {bx, by}) == BlockState::intact) continue;
        for (int y = by * bs; y < (by + 1) * bs; ++y)
          for (int x = bx * bs; x < (bx + 1) * bs; ++x) f.luma.at(x, y) = fill;
        if (planes == LossPlanes::all && f.has_chroma()) {
          const int cbs = bs / 2;
          for (int y = by * cbs; y < (by + 1) * cbs; ++y)
            for (int x = bx * cbs; x < (bx + 1) * cbs; ++x) {
              f.cb.at(x, y) = fill;
              f.cr.at(x, y) = fill;
            }
        }
      }
    }
  }
  return out;
}

std::vector<int> parse_frame_list(std::string_view text) {
  auto to_int = [&](std::string_view part) {
    if (part.empty()) throw ConfigError("malformed frame list '" + std::string(text) + "'");
    int value = 0;
    for (char c : part) {
      if (c < '0' || c > '9')
        throw ConfigError("malformed frame list '" + std::string(text) + "'");
      value = value * 10 + (c - '0');
    }
    return value;
  };

  std::vector<int> frames;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const std::string_view item = text.substr(start, comma - start);
    if (const auto dots = item.find(".."); dots != std::string_view::npos) {
      std::string_view tail = item.substr(dots + 2);
      int step = 1;
      if (const auto colon = tail.find(':'); colon != std::string_view::npos) {
        step = to_int(tail.substr(colon + 1));
        tail = tail.substr(0, colon);
      }
      const int first = to_int(item.substr(0, dots));
      const int last = to_int(tail);
      if (step <= 0 || last < first)
        throw ConfigError("malformed frame range '" + std::string(item) + "'");
      for (int t = first; t <= last; t += step) frames.push_back(t);
    } else {
      frames.push_back(to_int(item));
    }
    start = comma + 1;
  }
  std::sort(frames.begin(), frames.end());
  frames.erase(std::unique(frames.begin(), frames.end()), frames.end());
  return frames;
}

std::vector<BlockCoord> concealment_order(const LossMask& mask, int t) {
  std::vector<BlockCoord> order;
  for (int by = 0; by < mask.blocks_y(); ++by)
    for (int bx = 0; bx < mask.blocks_x(); ++bx)
      if (mask.state(t, {bx, by}) == BlockState::lost) order.push_back({bx, by});
  return order;
}

void write_mask(const LossMask& mask, std::ostream& out) {
  const auto& g = mask.geometry();
  out << "# width " << g.width << " height " << g.height << " frames " << g.frame_count
      << " block " << g.block_size << "\n";
  out << "# frame bx by\n";
  for (int t = 0; t < mask.frame_count(); ++t)
    for (int by = 0; by < mask.blocks_y(); ++by)
      for (int bx = 0; bx < mask.blocks_x(); ++bx)
        if (mask.state(t, {bx, by}) != BlockState::intact)
          out << t << ' ' << bx << ' ' << by << '\n';
}

void write_mask(const LossMask& mask, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write_mask(mask, out);
  if (!out) throw DataError("write failure in " + path.string());
}

LossMask read_mask(std::istream& in, const MaskGeometry& geometry) {
  LossMask mask(geometry);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    int t = 0;
    BlockCoord b;
    if (!(fields >> t)) continue;  // blank line
    std::string rest;
    if (!(fields >> b.bx >> b.by) || (fields >> rest))
      throw DataError("mask line " + std::to_string(line_no) + ": expected `frame bx by`");
    if (!mask.contains(t, b))
      throw DataError("mask line " + std::to_string(line_no) + ": block out of range");
    mask.mark_lost(t, b);
  }
  return mask;
}

LossMask read_mask(const std::filesystem::path& path, const MaskGeometry& geometry) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open mask " + path.string());
  return read_mask(in, geometry);
}

}  // namespace camfse
