#include "camfse/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <thread>

#include "camfse/error.hpp"

namespace camfse {

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::content_adaptive: return "ca-mc-fse";
    case Mode::fixed_weighting: return "mc-fse";
    case Mode::temporal_copy: return "temporal-copy";
  }
  return "unknown";
}

Mode parse_mode(std::string_view name) {
  if (name == "ca-mc-fse" || name == "content_adaptive") return Mode::content_adaptive;
  if (name == "mc-fse" || name == "fixed_weighting") return Mode::fixed_weighting;
  if (name == "temporal-copy" || name == "temporal_copy") return Mode::temporal_copy;
  throw ConfigError("unknown mode '" + std::string(name) + "'");
}

void ConcealConfig::validate() const {
  if (n_prev < 0 || n_follow < 0) throw ConfigError("frame counts must be non-negative");
  if (n_prev + n_follow < 1) throw ConfigError("at least one reference frame is required");
  if (d_max < 0) throw ConfigError("d_max must be non-negative");
  if (ring_width <= 0) throw ConfigError("ring width must be positive");
  if (block_size <= 0 || block_size % 2 != 0) throw ConfigError("block size must be even");
  if (border < 0 || border % 2 != 0) throw ConfigError("border must be even and non-negative");
  if (!(t_abs > 0 && t_rel > 0 && t_e > 0 && omega_max > 0))
    throw ConfigError("thresholds must be positive");
  if (!(delta >= 0.0 && delta <= 1.0)) throw ConfigError("delta must lie in [0,1]");
  if (threads < 1) throw ConfigError("thread count must be at least 1");
  if (reference_omega && *reference_omega < 0.0)
    throw ConfigError("reference omega must be non-negative");
  fse.validate(block_size + 2 * border, block_size + 2 * border, n_prev + n_follow + 1);
}

VolumeGeometry ConcealConfig::volume_geometry() const {
  return {block_size, border, n_prev, n_follow};
}

WeightConfig ConcealConfig::weight_config() const {
  return {fse.rho_hat, omega_max, t_e, delta,
          mode == Mode::fixed_weighting ? Weighting::fixed : Weighting::content_adaptive};
}

void print_config(const ConcealConfig& c, std::ostream& out) {
  out << "mode = " << to_string(c.mode) << '\n'
      << "n_prev = " << c.n_prev << '\n'
      << "n_follow = " << c.n_follow << '\n'
      << "block_size = " << c.block_size << '\n'
      << "border = " << c.border << '\n'
      << "d_max = " << c.d_max << '\n'
      << "ring_width = " << c.ring_width << '\n'
      << "t_abs = " << c.t_abs << '\n'
      << "t_rel = " << c.t_rel << '\n'
      << "omega_max = " << c.omega_max << '\n'
      << "t_e = " << c.t_e << '\n'
      << "delta = " << c.delta << '\n'
      << "iterations = " << c.fse.iterations << '\n'
      << "gamma = " << c.fse.gamma << '\n'
      << "rho_hat = " << c.fse.rho_hat << '\n'
      << "fft = " << c.fse.dims.m << 'x' << c.fse.dims.n << 'x' << c.fse.dims.p << '\n'
      << "threads = " << c.threads << '\n'
      << "chroma = " << (c.conceal_chroma ? "on" : "off") << '\n';
  if (c.reference_omega) out << "reference_omega = " << *c.reference_omega << '\n';
  if (c.debug)
    out << "debug_block = " << c.debug->frame << ',' << c.debug->block.bx << ','
        << c.debug->block.by << " -> " << c.debug->prefix.string() << '\n';
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint8_t to_pixel(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

struct PlaneGeometry {
  Component component;
  int scale;  // luma samples per plane sample
  int block_size;
  int border;
};

PlaneGeometry plane_geometry(const ConcealConfig& c, Component comp) {
  const int s = comp == Component::luma ? 1 : 2;
  return {comp, s, c.block_size / s, c.border / s};
}

// Nearest intact or concealed sample of the same frame within the block's
// neighbourhood, else the co-located sample of an adjacent frame, else 128.
std::vector<std::uint8_t> fallback_fill(const VideoSequence& buf, const LossMask& mask, int frame,
                                        BlockCoord block, const PlaneGeometry& g) {
  const Plane& plane = plane_of(buf.frame(frame), g.component);
  const int x0 = block.bx * g.block_size;
  const int y0 = block.by * g.block_size;
  const int xa = std::max(0, x0 - g.border), xb = std::min(plane.width(), x0 + g.block_size + g.border);
  const int ya = std::max(0, y0 - g.border), yb = std::min(plane.height(), y0 + g.block_size + g.border);

  const Plane* adjacent = nullptr;
  if (frame > 0)
    adjacent = &plane_of(buf.frame(frame - 1), g.component);
  else if (frame + 1 < buf.frame_count())
    adjacent = &plane_of(buf.frame(frame + 1), g.component);

  std::vector<std::uint8_t> out;
  out.reserve(static_cast<std::size_t>(g.block_size) * g.block_size);
  for (int y = y0; y < y0 + g.block_size; ++y) {
    for (int x = x0; x < x0 + g.block_size; ++x) {
      long best = std::numeric_limits<long>::max();
      std::uint8_t value = adjacent ? adjacent->at(x, y) : 128;
      for (int sy = ya; sy < yb; ++sy)
        for (int sx = xa; sx < xb; ++sx) {
          if (mask.pixel_state(frame, sx * g.scale, sy * g.scale) == BlockState::lost) continue;
          const long d = static_cast<long>(sx - x) * (sx - x) + static_cast<long>(sy - y) * (sy - y);
          if (d < best) {
            best = d;
            value = plane.at(sx, sy);
          }
        }
      out.push_back(value);
    }
  }
  return out;
}

std::vector<std::uint8_t> copy_block(const VideoSequence& buf, int source_frame, BlockCoord block,
                                     Displacement v, const PlaneGeometry& g) {
  const Plane& plane = plane_of(buf.frame(source_frame), g.component);
  std::vector<std::uint8_t> out;
  out.reserve(static_cast<std::size_t>(g.block_size) * g.block_size);
  for (int y = block.by * g.block_size; y < (block.by + 1) * g.block_size; ++y)
    for (int x = block.bx * g.block_size; x < (block.bx + 1) * g.block_size; ++x)
      out.push_back(plane.clamped(x + v.dx, y + v.dy));
  return out;
}

int halve(int v) { return static_cast<int>(std::lround(v / 2.0)); }

std::vector<MotionEstimate> to_chroma(std::vector<MotionEstimate> estimates) {
  for (auto& e : estimates) e.vector = {halve(e.vector.dx), halve(e.vector.dy)};
  return estimates;
}

const MotionEstimate* find_estimate(const std::vector<MotionEstimate>& estimates, int kappa) {
  for (const auto& e : estimates)
    if (e.kappa == kappa) return &e;
  return nullptr;
}

// Model the block of one plane; nullopt when the volume has no support.
std::optional<std::vector<std::uint8_t>> extrapolate_plane(
    const VideoSequence& buf, const LossMask& mask, int frame, BlockCoord block,
    const std::vector<MotionEstimate>& estimates, const std::vector<double>& factors,
    const ConcealConfig& config, const PlaneGeometry& g) {
  VolumeGeometry vg = config.volume_geometry();
  vg.block_size = g.block_size;
  vg.border = g.border;
  FseConfig fse = config.fse;
  fse.dims.m /= g.scale;
  fse.dims.n /= g.scale;

  const auto vol = extract_volume(buf, mask, frame, block, estimates, vg, g.component);
  WeightVolume weights;
  try {
    weights = build_weights(vol, factors, config.fse.rho_hat, config.delta);
  } catch (const NoSupportError&) {
    return std::nullopt;
  }
  const bool debug = config.debug && g.component == Component::luma &&
                     config.debug->frame == frame && config.debug->block == block;
  fse.record_trace = fse.record_trace || debug;
  const SpectralModel model = generate_model_fast(vol, weights, fse);
  if (debug) {
    const auto& base = config.debug->prefix;
    dump_volume(vol, weights, base);
    write_trace_csv(model, base.parent_path() / (base.filename().string() + "_trace.csv"));
  }

  std::vector<VolumeCoord> region;
  region.reserve(static_cast<std::size_t>(g.block_size) * g.block_size);
  for (int n = g.border; n < g.border + g.block_size; ++n)
    for (int m = g.border; m < g.border + g.block_size; ++m)
      region.push_back({m, n, vol.center_layer});
  const auto values = render_model(model, region);

  std::vector<std::uint8_t> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(to_pixel(v));
  return out;
}

std::vector<int> reference_offsets(const VideoSequence& buf, int frame,
                                   const ConcealConfig& config) {
  std::vector<int> kappas;
  auto exists = [&](int k) { return frame + k >= 0 && frame + k < buf.frame_count(); };
  if (config.mode == Mode::temporal_copy) {
    if (exists(-1))
      kappas.push_back(-1);
    else if (exists(1))
      kappas.push_back(1);
    return kappas;
  }
  for (int k = -config.n_prev; k <= config.n_follow; ++k)
    if (k != 0 && exists(k)) kappas.push_back(k);
  return kappas;
}

}  // namespace

ConcealedBlock conceal_block(const VideoSequence& buffer, const LossMask& mask, int frame,
                             BlockCoord block, const ConcealConfig& config) {
  config.validate();
  if (!mask.matches(buffer)) throw DataError("mask geometry does not match the sequence");
  if (mask.block_size() != config.block_size)
    throw ConfigError("mask block size differs from the configured block size");
  if (mask.state(frame, block) != BlockState::lost)
    throw DataError("conceal_block called on a block that is not lost");

  ConcealedBlock out;
  out.frame = frame;
  out.block = block;
  out.report.frame = frame;
  out.report.block = block;

  std::vector<MotionEstimate> estimates;
  std::optional<SupportRing> ring;
  try {
    ring = build_support_ring(mask, frame, block, config.ring_width);
  } catch (const EmptyRingError&) {
  }
  if (ring)
    for (int kappa : reference_offsets(buffer, frame, config))
      estimates.push_back(estimate_motion(buffer, mask, *ring, kappa, config.d_max));
  estimates = assess_reliability(estimates, config.t_abs, config.t_rel);
  out.report.aligned = all_reliable(estimates);

  const bool chroma = config.conceal_chroma && buffer.frame(frame).has_chroma();
  const PlaneGeometry luma_g = plane_geometry(config, Component::luma);
  const PlaneGeometry cb_g = plane_geometry(config, Component::cb);
  const PlaneGeometry cr_g = plane_geometry(config, Component::cr);

  auto fill_all = [&] {
    out.report.fallback_fill = true;
    out.luma = fallback_fill(buffer, mask, frame, block, luma_g);
    if (chroma) {
      out.cb = fallback_fill(buffer, mask, frame, block, cb_g);
      out.cr = fallback_fill(buffer, mask, frame, block, cr_g);
    }
  };

  if (config.mode == Mode::temporal_copy) {
    const auto kappas = reference_offsets(buffer, frame, config);
    if (kappas.empty()) {
      fill_all();
      return out;
    }
    const int kappa = kappas.front();
    Displacement v;
    if (const auto* e = find_estimate(estimates, kappa)) {
      if (e->reliable) v = e->vector;
      out.report.layers.push_back({kappa, e->vector, e->error, e->reliable, kNaN});
    } else {
      out.report.layers.push_back({kappa, {}, kNaN, false, kNaN});
    }
    out.luma = copy_block(buffer, frame + kappa, block, v, luma_g);
    if (chroma) {
      const Displacement cv{halve(v.dx), halve(v.dy)};
      out.cb = copy_block(buffer, frame + kappa, block, cv, cb_g);
      out.cr = copy_block(buffer, frame + kappa, block, cv, cr_g);
    }
    return out;
  }

  // Per-layer factors only depend on the estimates, so compute them once
  // against a luma-sized volume shell.
  const VolumeGeometry vg = config.volume_geometry();
  std::vector<double> factors(static_cast<std::size_t>(vg.layers()), 1.0);
  {
    ExtrapolationVolume shell(1, 1, vg.layers(), vg.n_prev);
    if (config.reference_omega) {
      for (int p = 0; p < vg.layers(); ++p)
        factors[static_cast<std::size_t>(p)] = p == vg.n_prev ? 1.0 : *config.reference_omega;
    } else {
      factors = layer_factors(shell, estimates, config.weight_config());
    }
  }

  for (int p = 0; p < vg.layers(); ++p) {
    const int kappa = p - vg.n_prev;
    if (frame + kappa < 0 || frame + kappa >= buffer.frame_count()) continue;
    const double f = factors[static_cast<std::size_t>(p)];
    if (kappa == 0) {
      out.report.layers.push_back({0, {}, 0.0, true, f});
    } else if (const auto* e = find_estimate(estimates, kappa)) {
      out.report.layers.push_back({kappa, e->vector, e->error, e->reliable, f});
    } else {
      out.report.layers.push_back({kappa, {}, kNaN, false, f});
    }
  }

  // The model only depends on weight ratios; scaling to a unit maximum makes
  // modes that agree up to a global factor produce identical arithmetic.
  const double top = *std::max_element(factors.begin(), factors.end());
  if (top > 0.0)
    for (double& f : factors) f /= top;

  auto luma = extrapolate_plane(buffer, mask, frame, block, estimates, factors, config, luma_g);
  if (!luma) {
    fill_all();
    return out;
  }
  out.luma = std::move(*luma);
  if (chroma) {
    const auto cest = to_chroma(estimates);
    for (const auto* g : {&cb_g, &cr_g}) {
      auto plane = extrapolate_plane(buffer, mask, frame, block, cest, factors, config, *g);
      auto& dst = g->component == Component::cb ? out.cb : out.cr;
      dst = plane ? std::move(*plane) : fallback_fill(buffer, mask, frame, block, *g);
    }
  }
  return out;
}

void write_block(VideoSequence& buffer, LossMask& mask, const ConcealedBlock& block) {
  const int bs = mask.block_size();
  Frame& f = buffer.frame(block.frame);
  auto write = [&](Plane& plane, const std::vector<std::uint8_t>& src, int size) {
    if (src.size() != static_cast<std::size_t>(size) * size)
      throw DataError("concealed block has the wrong size");
    std::size_t i = 0;
    for (int y = block.block.by * size; y < (block.block.by + 1) * size; ++y)
      for (int x = block.block.bx * size; x < (block.block.bx + 1) * size; ++x)
        plane.at(x, y) = src[i++];
  };
  write(f.luma, block.luma, bs);
  if (!block.cb.empty() && f.has_chroma()) {
    write(f.cb, block.cb, bs / 2);
    write(f.cr, block.cr, bs / 2);
  }
  mask.mark_concealed(block.frame, block.block);
}

namespace {

template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  pool.clear();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// Wave number of each block: one more than the latest earlier block whose
// footprint lies inside its read neighbourhood.
std::vector<int> schedule_waves(const std::vector<BlockCoord>& order, int reach) {
  std::vector<int> wave(order.size(), 0);
  for (std::size_t j = 0; j < order.size(); ++j)
    for (std::size_t i = 0; i < j; ++i)
      if (std::abs(order[i].bx - order[j].bx) <= reach &&
          std::abs(order[i].by - order[j].by) <= reach)
        wave[j] = std::max(wave[j], wave[i] + 1);
  return wave;
}

double block_psnr(const Plane& a, const Plane& b, BlockCoord block, int bs) {
  double sse = 0.0;
  for (int y = block.by * bs; y < (block.by + 1) * bs; ++y)
    for (int x = block.bx * bs; x < (block.bx + 1) * bs; ++x) {
      const double d = static_cast<double>(a.at(x, y)) - b.at(x, y);
      sse += d * d;
    }
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / (sse / (static_cast<double>(bs) * bs)));
}

}  // namespace

ConcealResult conceal_sequence(const VideoSequence& seq, const LossMask& mask,
                               const ConcealConfig& config, const VideoSequence* original) {
  config.validate();
  if (!mask.matches(seq)) throw DataError("mask geometry does not match the sequence");
  if (mask.block_size() != config.block_size)
    throw ConfigError("mask block size differs from the configured block size");
  if (original && (original->width() != seq.width() || original->height() != seq.height() ||
                   original->frame_count() != seq.frame_count()))
    throw DataError("original sequence geometry does not match");

  ConcealResult result{seq, mask, {}};
  const int reach = (std::max(config.border, config.ring_width) + config.block_size - 1) /
                    config.block_size;

  for (int t = 0; t < seq.frame_count(); ++t) {
    const auto order = concealment_order(result.mask, t);
    if (order.empty()) continue;
    const auto wave = schedule_waves(order, reach);
    const int waves = *std::max_element(wave.begin(), wave.end()) + 1;

    std::vector<BlockReport> frame_report(order.size());
    for (int w = 0; w < waves; ++w) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < order.size(); ++i)
        if (wave[i] == w) members.push_back(i);

      std::vector<ConcealedBlock> done(members.size());
      parallel_for(members.size(), config.threads, [&](std::size_t k) {
        done[k] = conceal_block(result.video, result.mask, t, order[members[k]], config);
      });
      for (std::size_t k = 0; k < members.size(); ++k) {
        write_block(result.video, result.mask, done[k]);
        if (original)
          done[k].report.psnr = block_psnr(original->frame(t).luma, result.video.frame(t).luma,
                                           done[k].block, config.block_size);
        frame_report[members[k]] = std::move(done[k].report);
      }
    }
    for (auto& r : frame_report) result.report.push_back(std::move(r));
  }
  return result;
}

void write_report_csv(const std::vector<BlockReport>& report, std::ostream& out) {
  out << "frame,bx,by,kappa,dx,dy,err,reliable,omega,psnr\n";
  auto num = [&](double v, int precision) {
    if (std::isnan(v)) return;
    if (std::isinf(v)) {
      out << (v > 0 ? "inf" : "-inf");
      return;
    }
    out << std::fixed << std::setprecision(precision) << v;
  };
  for (const auto& r : report) {
    for (const auto& l : r.layers) {
      out << r.frame << ',' << r.block.bx << ',' << r.block.by << ',' << l.kappa << ','
          << l.vector.dx << ',' << l.vector.dy << ',';
      num(l.error, 6);
      out << ',' << (l.reliable ? 1 : 0) << ',';
      num(l.omega, 6);
      out << ',';
      if (r.psnr) num(std::min(*r.psnr, kPsnrCap), 2);
      out << '\n';
    }
  }
}

void write_report_csv(const std::vector<BlockReport>& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write_report_csv(report, out);
  if (!out) throw DataError("write failure in " + path.string());
}

}  // namespace camfse
