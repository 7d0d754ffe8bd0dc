#include "camfse/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>

#include "camfse/error.hpp"

namespace camfse {

double psnr_blocks(const VideoSequence& original, const VideoSequence& concealed,
                   const LossMask& mask) {
  if (!mask.matches(original) || !mask.matches(concealed))
    throw DataError("sequence geometry does not match the mask");
  const int bs = mask.block_size();
  double sse = 0.0;
  long long count = 0;
  for (int t = 0; t < mask.frame_count(); ++t) {
    const Plane& a = original.frame(t).luma;
    const Plane& b = concealed.frame(t).luma;
    for (int by = 0; by < mask.blocks_y(); ++by)
      for (int bx = 0; bx < mask.blocks_x(); ++bx) {
        if (mask.state(t, {bx, by}) == BlockState::intact) continue;
        for (int y = by * bs; y < (by + 1) * bs; ++y)
          for (int x = bx * bs; x < (bx + 1) * bs; ++x) {
            const double d = static_cast<double>(a.at(x, y)) - b.at(x, y);
            sse += d * d;
          }
        count += static_cast<long long>(bs) * bs;
      }
  }
  if (count == 0) throw DataError("mask contains no damaged blocks");
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / (sse / static_cast<double>(count)));
}

std::vector<double> default_omega_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 30; ++i) grid.push_back(i * 0.05);
  return grid;
}

TrainingPair best_weight_search(const VideoSequence& buffer, const VideoSequence& original,
                                const LossMask& mask, int frame, BlockCoord block,
                                const ConcealConfig& config, std::span<const double> omega_grid) {
  if (omega_grid.empty()) throw ConfigError("empty omega grid");
  if (config.mode == Mode::temporal_copy)
    throw ConfigError("weight search needs an extrapolating mode");

  ConcealConfig cfg = config;
  TrainingPair pair;
  double best_psnr = -std::numeric_limits<double>::infinity();
  bool first = true;
  for (double w : omega_grid) {
    cfg.reference_omega = w;
    const ConcealedBlock out = conceal_block(buffer, mask, frame, block, cfg);

    if (first) {
      double sum_reliable = 0.0, sum_all = 0.0;
      int n_reliable = 0, n_all = 0;
      for (const auto& l : out.report.layers) {
        if (l.kappa == 0 || !std::isfinite(l.error)) continue;
        sum_all += l.error;
        ++n_all;
        if (l.reliable) {
          sum_reliable += l.error;
          ++n_reliable;
        }
      }
      if (n_all == 0) throw DataError("block has no motion estimate to pair with a weight");
      pair.error = n_reliable > 0 ? sum_reliable / n_reliable : sum_all / n_all;
    }

    const int bs = config.block_size;
    const Plane& ref = original.frame(frame).luma;
    double sse = 0.0;
    std::size_t i = 0;
    for (int y = block.by * bs; y < (block.by + 1) * bs; ++y)
      for (int x = block.bx * bs; x < (block.bx + 1) * bs; ++x) {
        const double d = static_cast<double>(ref.at(x, y)) - out.luma[i++];
        sse += d * d;
      }
    const double psnr = sse == 0.0 ? std::numeric_limits<double>::infinity()
                                   : 10.0 * std::log10(255.0 * 255.0 * bs * bs / sse);
    if (first || psnr > best_psnr || (psnr == best_psnr && w > pair.best_omega)) {
      best_psnr = psnr;
      pair.best_omega = w;
    }
    first = false;
  }
  return pair;
}

WeightModel fit_weight_model(std::span<const TrainingPair> pairs) {
  if (pairs.size() < 2) throw DegenerateFitError("at least two training pairs are required");
  double mx = 0.0, my = 0.0;
  for (const auto& p : pairs) {
    mx += p.error;
    my += p.best_omega;
  }
  const auto n = static_cast<double>(pairs.size());
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : pairs) {
    sxx += (p.error - mx) * (p.error - mx);
    sxy += (p.error - mx) * (p.best_omega - my);
  }
  if (sxx == 0.0) throw DegenerateFitError("training errors are all identical");

  WeightModel model;
  model.slope = sxy / sxx;
  model.intercept = my - model.slope * mx;
  if (model.slope >= 0.0 || model.intercept <= 0.0)
    throw DegenerateFitError("training data shows no decreasing trend");
  model.omega_max = model.intercept;
  model.t_e = -model.intercept / model.slope;
  return model;
}

void write_pairs_csv(std::span<const TrainingPair> pairs, std::ostream& out) {
  out << "error,best_omega\n";
  out << std::setprecision(10);
  for (const auto& p : pairs) out << p.error << ',' << p.best_omega << '\n';
}

void write_pairs_csv(std::span<const TrainingPair> pairs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write_pairs_csv(pairs, out);
  if (!out) throw DataError("write failure in " + path.string());
}

ComparisonTable run_comparison(const VideoSequence& original, std::span<const NamedMask> masks,
                               std::span<const Mode> modes, const ConcealConfig& config) {
  ComparisonTable table;
  std::vector<std::vector<double>> psnr(modes.size());
  for (const auto& named : masks) {
    const VideoSequence corrupted = apply_loss(original, named.mask);
    for (std::size_t i = 0; i < modes.size(); ++i) {
      ConcealConfig cfg = config;
      cfg.mode = modes[i];
      const ConcealResult result = conceal_sequence(corrupted, named.mask, cfg);
      const double value =
          std::min(psnr_blocks(original, result.video, result.mask), kPsnrCap);
      table.rows.push_back({named.name, modes[i], named.mask.damaged_count(), value});
      psnr[i].push_back(value);
    }
  }
  for (std::size_t i = 0; i < modes.size(); ++i)
    for (std::size_t j = i + 1; j < modes.size(); ++j) {
      double gain = 0.0;
      for (std::size_t k = 0; k < masks.size(); ++k) gain += psnr[i][k] - psnr[j][k];
      if (!masks.empty()) gain /= static_cast<double>(masks.size());
      table.gains.push_back({modes[i], modes[j], gain});
    }
  return table;
}

void write_comparison_csv(const ComparisonTable& table, std::ostream& out) {
  out << "kind,mask,mode,blocks,psnr_db\n";
  out << std::fixed << std::setprecision(4);
  for (const auto& r : table.rows)
    out << "result," << r.mask << ',' << to_string(r.mode) << ',' << r.blocks << ',' << r.psnr
        << '\n';
  for (const auto& g : table.gains)
    out << "gain,mean," << to_string(g.better) << "_vs_" << to_string(g.baseline) << ",,"
        << g.mean_gain << '\n';
}

}  // namespace camfse
