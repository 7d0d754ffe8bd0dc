#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "camfse/camfse.hpp"

namespace camfse::cli {
namespace {

namespace fs = std::filesystem;

struct Input {
  fs::path path;
  int width = 0;
  int height = 0;
  int max_frames = std::numeric_limits<int>::max();
};

void add_input(CLI::App& sub, Input& in, const std::string& help = "raw I420 input") {
  sub.add_option("-i,--input", in.path, help)->required();
  sub.add_option("--width", in.width, "luma width")->required();
  sub.add_option("--height", in.height, "luma height")->required();
  sub.add_option("--max-frames", in.max_frames, "read at most this many frames");
}

void add_config(CLI::App& sub, ConcealConfig& c, std::string& mode) {
  sub.add_option("--mode", mode, "ca-mc-fse | mc-fse | temporal-copy")->capture_default_str();
  sub.add_option("--n-prev", c.n_prev, "previous reference frames")->capture_default_str();
  sub.add_option("--n-follow", c.n_follow, "following reference frames")->capture_default_str();
  sub.add_option("--d-max", c.d_max, "motion search range")->capture_default_str();
  sub.add_option("--ring-width", c.ring_width, "matching ring width")->capture_default_str();
  sub.add_option("--block-size", c.block_size)->capture_default_str();
  sub.add_option("--border", c.border, "support border around the block")
      ->capture_default_str();
  sub.add_option("--t-abs", c.t_abs, "absolute reliability threshold")->capture_default_str();
  sub.add_option("--t-rel", c.t_rel, "relative reliability threshold")->capture_default_str();
  sub.add_option("--omega-max", c.omega_max)->capture_default_str();
  sub.add_option("--t-e", c.t_e, "error at which a layer's weight reaches zero")
      ->capture_default_str();
  sub.add_option("--delta", c.delta, "weight factor of concealed samples")
      ->capture_default_str();
  sub.add_option("--iterations", c.fse.iterations)->capture_default_str();
  sub.add_option("--gamma", c.fse.gamma, "orthogonality deficiency compensation")
      ->capture_default_str();
  sub.add_option("--rho-hat", c.fse.rho_hat, "spatial weight decay")->capture_default_str();
  sub.add_option("--fft-m", c.fse.dims.m)->capture_default_str();
  sub.add_option("--fft-n", c.fse.dims.n)->capture_default_str();
  sub.add_option("--fft-p", c.fse.dims.p)->capture_default_str();
  sub.add_option("--threads", c.threads)->capture_default_str();
  sub.add_flag("--chroma", c.conceal_chroma, "conceal chroma planes as well");
}

struct Pattern {
  std::string name = "checkerboard";
  int parity = 0;
  std::string frames;
};

LossMask make_mask(const std::string& pattern, int parity, const std::vector<int>& frames,
                   const MaskGeometry& geometry) {
  if (pattern == "checkerboard") return checkerboard_mask(frames, parity, geometry);
  if (pattern == "slices") return slice_mask(frames, parity, geometry);
  throw ConfigError("unknown pattern '" + pattern + "'");
}

std::vector<int> clip_frames(std::vector<int> frames, int frame_count) {
  std::erase_if(frames, [&](int t) { return t >= frame_count; });
  if (frames.empty()) throw DataError("no selected frame exists in the input");
  return frames;
}

void print_input(std::ostream& out, const std::string& command, const Input& in) {
  out << "command = " << command << '\n'
      << "input = " << in.path.string() << '\n'
      << "width = " << in.width << '\n'
      << "height = " << in.height << '\n';
  if (in.max_frames != std::numeric_limits<int>::max())
    out << "max_frames = " << in.max_frames << '\n';
}

std::string format_db(double v) {
  if (std::isinf(v)) return "inf";
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << v;
  return s.str();
}

DebugTarget parse_debug_block(const std::string& text, const std::string& prefix) {
  DebugTarget target;
  char c1 = 0, c2 = 0;
  std::istringstream s(text);
  std::string rest;
  if (!(s >> target.frame >> c1 >> target.block.bx >> c2 >> target.block.by) || c1 != ',' ||
      c2 != ',' || (s >> rest))
    throw ConfigError("--debug-block expects frame,bx,by");
  target.prefix = prefix;
  return target;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Motion-compensated frequency selective extrapolation for lost video blocks",
               "camfse"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // corrupt
  Input corrupt_in;
  Pattern corrupt_pattern;
  fs::path corrupt_out, corrupt_mask;
  int corrupt_block = kDefaultBlockSize;
  int corrupt_fill = 0;
  auto* corrupt = app.add_subcommand("corrupt", "blank blocks following a loss pattern");
  add_input(*corrupt, corrupt_in);
  corrupt->add_option("--pattern", corrupt_pattern.name, "checkerboard | slices")
      ->capture_default_str();
  corrupt->add_option("--parity", corrupt_pattern.parity, "pattern phase, 0 or 1")
      ->capture_default_str();
  corrupt->add_option("--frames", corrupt_pattern.frames, "frames to damage, e.g. 5..200:5")
      ->required();
  corrupt->add_option("--block-size", corrupt_block)->capture_default_str();
  corrupt->add_option("--fill", corrupt_fill, "value written into lost samples")
      ->capture_default_str()
      ->check(CLI::Range(0, 255));
  corrupt->add_option("-o,--output", corrupt_out, "corrupted video")->required();
  corrupt->add_option("--mask", corrupt_mask, "mask file to write")->required();

  // conceal
  Input conceal_in;
  ConcealConfig conceal_cfg;
  std::string conceal_mode{to_string(conceal_cfg.mode)};
  fs::path conceal_maskfile, conceal_out, conceal_ref, conceal_report;
  std::string debug_block, debug_prefix = "camfse_debug";
  auto* conceal = app.add_subcommand("conceal", "conceal the lost blocks of a video");
  add_input(*conceal, conceal_in, "corrupted raw I420 input");
  conceal->add_option("--mask", conceal_maskfile, "mask file")->required();
  conceal->add_option("-o,--output", conceal_out, "concealed video")->required();
  conceal->add_option("--reference", conceal_ref, "undistorted video for PSNR");
  conceal->add_option("--report", conceal_report, "per-block CSV report");
  conceal->add_option("--debug-block", debug_block, "dump volume and trace of frame,bx,by");
  conceal->add_option("--debug-prefix", debug_prefix, "path prefix of debug dumps")
      ->capture_default_str();
  add_config(*conceal, conceal_cfg, conceal_mode);

  // evaluate
  Input eval_in;
  fs::path eval_ref, eval_mask;
  int eval_block = kDefaultBlockSize;
  auto* evaluate = app.add_subcommand("evaluate", "PSNR over the damaged blocks");
  add_input(*evaluate, eval_in, "concealed raw I420 input");
  evaluate->add_option("--reference", eval_ref, "undistorted video")->required();
  evaluate->add_option("--mask", eval_mask, "mask file")->required();
  evaluate->add_option("--block-size", eval_block)->capture_default_str();

  // train
  Input train_in;
  Pattern train_pattern;
  train_pattern.frames = "5..200:5";
  ConcealConfig train_cfg;
  std::string train_mode{to_string(train_cfg.mode)};
  fs::path train_pairs;
  auto* train = app.add_subcommand("train", "fit omega_max and t_e on an undistorted video");
  add_input(*train, train_in, "undistorted raw I420 input");
  train->add_option("--pattern", train_pattern.name)->capture_default_str();
  train->add_option("--parity", train_pattern.parity)->capture_default_str();
  train->add_option("--frames", train_pattern.frames)->capture_default_str();
  train->add_option("--pairs", train_pairs, "training pairs CSV to write");
  add_config(*train, train_cfg, train_mode);

  // compare
  Input cmp_in;
  std::vector<std::string> cmp_patterns{"checkerboard", "slices"};
  int cmp_parity = 0;
  std::string cmp_frames;
  std::vector<std::string> cmp_modes{"ca-mc-fse", "mc-fse", "temporal-copy"};
  ConcealConfig cmp_cfg;
  std::string cmp_mode{to_string(cmp_cfg.mode)};
  fs::path cmp_out;
  auto* compare = app.add_subcommand("compare", "PSNR table over loss patterns and modes");
  add_input(*compare, cmp_in, "undistorted raw I420 input");
  compare->add_option("--patterns", cmp_patterns)->delimiter(',')->capture_default_str();
  compare->add_option("--parity", cmp_parity)->capture_default_str();
  compare->add_option("--frames", cmp_frames)->required();
  compare->add_option("--modes", cmp_modes)->delimiter(',')->capture_default_str();
  compare->add_option("-o,--output", cmp_out, "comparison CSV")->required();
  add_config(*compare, cmp_cfg, cmp_mode);
  compare->get_option("--mode")->description("unused; see --modes");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (corrupt->parsed()) {
      const auto frames = parse_frame_list(corrupt_pattern.frames);
      print_input(out, "corrupt", corrupt_in);
      out << "pattern = " << corrupt_pattern.name << '\n'
          << "parity = " << corrupt_pattern.parity << '\n'
          << "frames = " << corrupt_pattern.frames << '\n'
          << "block_size = " << corrupt_block << '\n'
          << "fill = " << corrupt_fill << '\n'
          << "output = " << corrupt_out.string() << '\n'
          << "mask = " << corrupt_mask.string() << '\n';
      const auto seq = load_sequence(corrupt_in.path, corrupt_in.width, corrupt_in.height,
                                     corrupt_in.max_frames);
      const auto used = clip_frames(frames, seq.frame_count());
      const auto mask = make_mask(corrupt_pattern.name, corrupt_pattern.parity, used,
                                  MaskGeometry::of(seq, corrupt_block));
      save_sequence(apply_loss(seq, mask, static_cast<std::uint8_t>(corrupt_fill),
                               LossPlanes::all),
                    corrupt_out);
      write_mask(mask, corrupt_mask);
      out << "lost blocks: " << mask.lost_count() << " in " << used.size() << " frames\n";
      return kExitOk;
    }

    if (conceal->parsed()) {
      conceal_cfg.mode = parse_mode(conceal_mode);
      if (!debug_block.empty()) conceal_cfg.debug = parse_debug_block(debug_block, debug_prefix);
      print_input(out, "conceal", conceal_in);
      out << "mask = " << conceal_maskfile.string() << '\n'
          << "output = " << conceal_out.string() << '\n';
      if (!conceal_ref.empty()) out << "reference = " << conceal_ref.string() << '\n';
      if (!conceal_report.empty()) out << "report = " << conceal_report.string() << '\n';
      print_config(conceal_cfg, out);
      conceal_cfg.validate();

      const auto seq = load_sequence(conceal_in.path, conceal_in.width, conceal_in.height,
                                     conceal_in.max_frames);
      const auto mask = read_mask(conceal_maskfile, MaskGeometry::of(seq, conceal_cfg.block_size));
      std::optional<VideoSequence> ref;
      if (!conceal_ref.empty()) {
        ref = load_sequence(conceal_ref, conceal_in.width, conceal_in.height,
                            conceal_in.max_frames);
        if (ref->frame_count() != seq.frame_count())
          throw DataError("reference and input frame counts differ");
      }
      const auto result = conceal_sequence(seq, mask, conceal_cfg, ref ? &*ref : nullptr);
      save_sequence(result.video, conceal_out);
      if (!conceal_report.empty()) write_report_csv(result.report, conceal_report);

      int fallback = 0;
      for (const auto& r : result.report) fallback += r.fallback_fill ? 1 : 0;
      out << "concealed blocks: " << result.report.size() << '\n'
          << "fallback fills: " << fallback << '\n';
      if (ref && mask.damaged_count() > 0)
        out << "psnr_db: " << format_db(psnr_blocks(*ref, result.video, mask)) << '\n';
      return kExitOk;
    }

    if (evaluate->parsed()) {
      print_input(out, "evaluate", eval_in);
      out << "reference = " << eval_ref.string() << '\n'
          << "mask = " << eval_mask.string() << '\n'
          << "block_size = " << eval_block << '\n';
      const auto seq =
          load_sequence(eval_in.path, eval_in.width, eval_in.height, eval_in.max_frames);
      const auto ref =
          load_sequence(eval_ref, eval_in.width, eval_in.height, eval_in.max_frames);
      const auto mask = read_mask(eval_mask, MaskGeometry::of(seq, eval_block));
      out << "damaged blocks: " << mask.damaged_count() << '\n'
          << "psnr_db: " << format_db(psnr_blocks(ref, seq, mask)) << '\n';
      return kExitOk;
    }

    if (train->parsed()) {
      train_cfg.mode = parse_mode(train_mode);
      const auto frames = parse_frame_list(train_pattern.frames);
      print_input(out, "train", train_in);
      out << "pattern = " << train_pattern.name << '\n'
          << "parity = " << train_pattern.parity << '\n'
          << "frames = " << train_pattern.frames << '\n';
      if (!train_pairs.empty()) out << "pairs = " << train_pairs.string() << '\n';
      print_config(train_cfg, out);
      train_cfg.validate();
      if (train_cfg.mode == Mode::temporal_copy)
        throw ConfigError("training needs an extrapolating mode");

      const auto original = load_sequence(train_in.path, train_in.width, train_in.height,
                                          train_in.max_frames);
      const auto used = clip_frames(frames, original.frame_count());
      LossMask mask = make_mask(train_pattern.name, train_pattern.parity, used,
                                MaskGeometry::of(original, train_cfg.block_size));
      VideoSequence buffer = apply_loss(original, mask);
      const auto grid = default_omega_grid();

      std::vector<TrainingPair> pairs;
      for (int t : used)
        for (const auto& b : concealment_order(mask, t)) {
          try {
            const TrainingPair pair =
                best_weight_search(buffer, original, mask, t, b, train_cfg, grid);
            pairs.push_back(pair);
            ConcealConfig cfg = train_cfg;
            cfg.reference_omega = pair.best_omega;
            write_block(buffer, mask, conceal_block(buffer, mask, t, b, cfg));
          } catch (const DataError&) {
            // no motion estimate to pair with; conceal normally and move on
            write_block(buffer, mask, conceal_block(buffer, mask, t, b, train_cfg));
          }
        }
      if (!train_pairs.empty()) write_pairs_csv(pairs, train_pairs);
      out << "training pairs: " << pairs.size() << '\n';
      const WeightModel model = fit_weight_model(pairs);
      out << std::setprecision(10) << "omega_max: " << model.omega_max << '\n'
          << "t_e: " << model.t_e << '\n';
      return kExitOk;
    }

    if (compare->parsed()) {
      const auto frames = parse_frame_list(cmp_frames);
      std::vector<Mode> modes;
      for (const auto& m : cmp_modes) modes.push_back(parse_mode(m));
      print_input(out, "compare", cmp_in);
      out << "patterns = ";
      for (std::size_t i = 0; i < cmp_patterns.size(); ++i)
        out << (i ? "," : "") << cmp_patterns[i];
      out << "\nparity = " << cmp_parity << "\nframes = " << cmp_frames << "\nmodes = ";
      for (std::size_t i = 0; i < modes.size(); ++i) out << (i ? "," : "") << to_string(modes[i]);
      out << "\noutput = " << cmp_out.string() << '\n';
      print_config(cmp_cfg, out);
      cmp_cfg.validate();

      const auto original =
          load_sequence(cmp_in.path, cmp_in.width, cmp_in.height, cmp_in.max_frames);
      const auto used = clip_frames(frames, original.frame_count());
      std::vector<NamedMask> masks;
      for (const auto& p : cmp_patterns)
        masks.push_back(
            {p, make_mask(p, cmp_parity, used, MaskGeometry::of(original, cmp_cfg.block_size))});
      const auto table = run_comparison(original, masks, modes, cmp_cfg);
      std::ofstream csv(cmp_out, std::ios::trunc);
      if (!csv) throw DataError("cannot open " + cmp_out.string() + " for writing");
      write_comparison_csv(table, csv);
      for (const auto& r : table.rows)
        out << r.mask << ' ' << to_string(r.mode) << ": " << format_db(r.psnr) << " dB over "
            << r.blocks << " blocks\n";
      for (const auto& g : table.gains)
        out << "mean gain " << to_string(g.better) << " vs " << to_string(g.baseline) << ": "
            << format_db(g.mean_gain) << " dB\n";
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace camfse::cli
