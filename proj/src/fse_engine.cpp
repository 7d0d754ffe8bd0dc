#include "camfse/fse_engine.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <string>

#include "camfse/error.hpp"
#include "fft.hpp"

namespace camfse {

using cd = std::complex<double>;

void FseConfig::validate(int M, int N, int P) const {
  if (iterations < 0) throw ConfigError("iteration count must be non-negative");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0,1]");
  if (!(rho_hat > 0.0 && rho_hat <= 1.0)) throw ConfigError("rho_hat must lie in (0,1]");
  if (dims.m < M || dims.n < N || dims.p < P)
    throw ConfigError("transform grid " + std::to_string(dims.m) + "x" + std::to_string(dims.n) +
                      "x" + std::to_string(dims.p) + " is smaller than the volume " +
                      std::to_string(M) + "x" + std::to_string(N) + "x" + std::to_string(P));
}

std::vector<int> SpectralModel::selected_set() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < coeffs.size(); ++i)
    if (coeffs[i] != cd{}) out.push_back(static_cast<int>(i));
  return out;
}

int bin_index(const TransformDims& dims, int km, int kn, int kp) {
  return (kp * dims.n + kn) * dims.m + km;
}

int mirror_bin(const TransformDims& dims, int bin) {
  const int km = bin % dims.m;
  const int kn = (bin / dims.m) % dims.n;
  const int kp = bin / (dims.m * dims.n);
  return bin_index(dims, (dims.m - km) % dims.m, (dims.n - kn) % dims.n,
                   (dims.p - kp) % dims.p);
}

namespace {

struct BinCoord {
  int km, kn, kp;
};

BinCoord decompose(const TransformDims& d, int bin) {
  return {bin % d.m, (bin / d.m) % d.n, bin / (d.m * d.n)};
}

// roots[k] = exp(sign * j*2*pi*k/n)
std::vector<cd> unit_roots(int n, double sign) {
  std::vector<cd> r(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double a = sign * 2.0 * std::numbers::pi * k / n;
    r[static_cast<std::size_t>(k)] = {std::cos(a), std::sin(a)};
  }
  return r;
}

int temporal_slot(int p, int center, int fp) { return ((p - center) % fp + fp) % fp; }

void check_inputs(const ExtrapolationVolume& vol, const WeightVolume& w, const FseConfig& cfg) {
  if (w.M != vol.M || w.N != vol.N || w.P != vol.P || w.weights.size() != vol.size())
    throw ConfigError("weight volume does not match the extrapolation volume");
  cfg.validate(vol.M, vol.N, vol.P);
}

/// Volume samples with positive weight, with their grid coordinates.
struct ActiveSample {
  int m, n, q;
  double w, f;
};

std::vector<ActiveSample> active_samples(const ExtrapolationVolume& vol, const WeightVolume& w,
                                         const TransformDims& d) {
  std::vector<ActiveSample> out;
  for (int p = 0; p < vol.P; ++p) {
    const int q = temporal_slot(p, vol.center_layer, d.p);
    for (int n = 0; n < vol.N; ++n)
      for (int m = 0; m < vol.M; ++m) {
        const std::size_t i = vol.index(m, n, p);
        if (w.weights[i] > 0.0) out.push_back({m, n, q, w.weights[i], vol.samples[i]});
      }
  }
  return out;
}

/// Spatial residual kept alongside the spectral iteration for energy tracking.
class ResidualTracker {
 public:
  ResidualTracker(std::vector<ActiveSample> samples, const TransformDims& d)
      : samples_(std::move(samples)),
        rm_(unit_roots(d.m, 1.0)),
        rn_(unit_roots(d.n, 1.0)),
        rp_(unit_roots(d.p, 1.0)),
        d_(d) {
    residual_.reserve(samples_.size());
    for (const auto& s : samples_) residual_.push_back(s.f);
  }

  // Subtracts delta*phi_u (self-conjugate) or 2*Re(delta*phi_u) (pair).
  void subtract(int bin, cd delta, bool self_conjugate) {
    const BinCoord k = decompose(d_, bin);
    const double scale = self_conjugate ? 1.0 : 2.0;
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      const auto& s = samples_[i];
      const cd phi = rm_[static_cast<std::size_t>((k.km * s.m) % d_.m)] *
                     rn_[static_cast<std::size_t>((k.kn * s.n) % d_.n)] *
                     rp_[static_cast<std::size_t>((k.kp * s.q) % d_.p)];
      residual_[i] -= scale * (delta * phi).real();
    }
  }

  double energy() const {
    double e = 0.0;
    for (std::size_t i = 0; i < samples_.size(); ++i)
      e += samples_[i].w * residual_[i] * residual_[i];
    return e;
  }

 private:
  std::vector<ActiveSample> samples_;
  std::vector<double> residual_;
  std::vector<cd> rm_, rn_, rp_;
  TransformDims d_;
};

SpectralModel empty_model(const ExtrapolationVolume& vol, const FseConfig& cfg) {
  SpectralModel model;
  model.dims = cfg.dims;
  model.center_layer = vol.center_layer;
  model.coeffs.assign(cfg.dims.size(), cd{});
  model.selections.reserve(static_cast<std::size_t>(cfg.iterations));
  return model;
}

void accumulate(SpectralModel& model, int bin, int mirror, cd delta) {
  model.coeffs[static_cast<std::size_t>(bin)] += delta;
  if (mirror != bin) model.coeffs[static_cast<std::size_t>(mirror)] += std::conj(delta);
}

}  // namespace

SpectralModel generate_model_fast(const ExtrapolationVolume& vol, const WeightVolume& w,
                                  const FseConfig& cfg) {
  check_inputs(vol, w, cfg);
  const TransformDims d = cfg.dims;
  const int FM = d.m;
  const int FN = d.n;
  const int FP = d.p;
  const std::size_t F = d.size();

  auto samples = active_samples(vol, w, d);
  if (samples.empty()) throw NoSupportError("weighting volume has no positive weight");

  std::vector<cd> W(F), R(F);
  for (const auto& s : samples) {
    const auto g = static_cast<std::size_t>(bin_index(d, s.m, s.n, s.q));
    W[g] = s.w;
    R[g] = s.w * s.f;
  }
  detail::forward_dft_3d(W, FP, FN, FM);
  detail::forward_dft_3d(R, FP, FN, FM);
  const double w0 = W[0].real();
  if (!(w0 > 0.0)) throw NoSupportError("weights sum to zero");

  // Every conjugate pair has its lower-index member in layers kp <= FP/2, so
  // only that leading part of R is kept up to date.
  const int half_layers = FP / 2 + 1;
  const std::size_t half = static_cast<std::size_t>(half_layers) * FN * FM;
  std::vector<unsigned char> canonical(half);
  for (std::size_t g = 0; g < half; ++g)
    canonical[g] = static_cast<int>(g) <= mirror_bin(d, static_cast<int>(g)) ? 1 : 0;

  // Each row of W repeated twice so that W[(km -/+ um) mod FM] is contiguous.
  std::vector<cd> wext(F * 2);
  for (std::size_t row = 0; row < F / FM; ++row)
    for (int km = 0; km < FM; ++km) {
      wext[row * 2 * FM + km] = W[row * FM + km];
      wext[row * 2 * FM + FM + km] = W[row * FM + km];
    }

  SpectralModel model = empty_model(vol, cfg);
  std::optional<ResidualTracker> tracker;
  if (cfg.track_energy) {
    tracker.emplace(samples, d);
    model.energy.reserve(static_cast<std::size_t>(cfg.iterations) + 1);
    model.energy.push_back(tracker->energy());
  }

  auto argmax = [&] {
    int best = 0;
    double best_mag = -1.0;
    for (std::size_t g = 0; g < half; ++g) {
      if (!canonical[g]) continue;
      const double mag = std::norm(R[g]);
      if (mag > best_mag) {
        best_mag = mag;
        best = static_cast<int>(g);
      }
    }
    return best;
  };

  int u = argmax();
  for (int it = 0; it < cfg.iterations; ++it) {
    const int mu = mirror_bin(d, u);
    const bool self_conjugate = mu == u;
    cd delta = cfg.gamma * R[static_cast<std::size_t>(u)] / w0;
    if (self_conjugate) delta = {delta.real(), 0.0};
    accumulate(model, u, mu, delta);
    model.selections.push_back(u);
    if (cfg.record_trace) model.trace.push_back({it, u, std::abs(delta)});
    if (tracker) {
      tracker->subtract(u, delta, self_conjugate);
      model.energy.push_back(tracker->energy());
    }

    // R[k] -= delta*W[k-u] + conj(delta)*W[k+u], fused with the next argmax.
    const BinCoord k = decompose(d, u);
    const double ar = delta.real();
    const double ai = delta.imag();
    int next = 0;
    double next_mag = -1.0;
    for (int kp = 0; kp < half_layers; ++kp) {
      const int ip1 = (kp - k.kp + FP) % FP;
      const int ip2 = (kp + k.kp) % FP;
      for (int kn = 0; kn < FN; ++kn) {
        const int in1 = (kn - k.kn + FN) % FN;
        const int in2 = (kn + k.kn) % FN;
        const std::size_t row = static_cast<std::size_t>(kp * FN + kn) * FM;
        double* r = reinterpret_cast<double*>(R.data() + row);
        const double* w1 = reinterpret_cast<const double*>(
            wext.data() + static_cast<std::size_t>(ip1 * FN + in1) * 2 * FM + FM - k.km);
        const double* w2 = reinterpret_cast<const double*>(
            wext.data() + static_cast<std::size_t>(ip2 * FN + in2) * 2 * FM + k.km);
        const unsigned char* canon = canonical.data() + row;
        if (self_conjugate) {
          for (int km = 0; km < FM; ++km) {
            const double wr = w1[2 * km], wi = w1[2 * km + 1];
            r[2 * km] -= ar * wr - ai * wi;
            r[2 * km + 1] -= ar * wi + ai * wr;
          }
        } else {
          for (int km = 0; km < FM; ++km) {
            const double w1r = w1[2 * km], w1i = w1[2 * km + 1];
            const double w2r = w2[2 * km], w2i = w2[2 * km + 1];
            // delta*w1 + conj(delta)*w2
            r[2 * km] -= (ar * w1r - ai * w1i) + (ar * w2r + ai * w2i);
            r[2 * km + 1] -= (ar * w1i + ai * w1r) + (ar * w2i - ai * w2r);
          }
        }
        for (int km = 0; km < FM; ++km) {
          if (!canon[km]) continue;
          const double mag = r[2 * km] * r[2 * km] + r[2 * km + 1] * r[2 * km + 1];
          if (mag > next_mag) {
            next_mag = mag;
            next = static_cast<int>(row) + km;
          }
        }
      }
    }
    u = next;
    ++model.iterations_run;
  }
  return model;
}

SpectralModel generate_model_reference(const ExtrapolationVolume& vol, const WeightVolume& w,
                                       const FseConfig& cfg) {
  check_inputs(vol, w, cfg);
  const TransformDims d = cfg.dims;
  const auto samples = active_samples(vol, w, d);
  if (samples.empty()) throw NoSupportError("weighting volume has no positive weight");

  double wsum = 0.0;
  for (const auto& s : samples) wsum += s.w;

  // conj(phi_k) and phi_k factor per axis.
  const auto cm = unit_roots(d.m, -1.0), cn = unit_roots(d.n, -1.0), cp = unit_roots(d.p, -1.0);
  const auto pm = unit_roots(d.m, 1.0), pn = unit_roots(d.n, 1.0), pp = unit_roots(d.p, 1.0);
  auto idx = [](int a, int b, int n) { return static_cast<std::size_t>((a * b) % n); };

  std::vector<double> r;
  r.reserve(samples.size());
  for (const auto& s : samples) r.push_back(s.f);

  const int F = static_cast<int>(d.size());
  std::vector<int> candidates;
  for (int g = 0; g < F; ++g)
    if (g <= mirror_bin(d, g)) candidates.push_back(g);

  auto energy = [&] {
    double e = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) e += samples[i].w * r[i] * r[i];
    return e;
  };

  SpectralModel model = empty_model(vol, cfg);
  if (cfg.track_energy) model.energy.push_back(energy());

  for (int it = 0; it < cfg.iterations; ++it) {
    int best = -1;
    double best_metric = -1.0;
    cd best_c;
    for (int g : candidates) {
      const BinCoord k = decompose(d, g);
      cd acc{};
      for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        acc += (s.w * r[i]) * (cm[idx(k.km, s.m, d.m)] * cn[idx(k.kn, s.n, d.n)] *
                               cp[idx(k.kp, s.q, d.p)]);
      }
      const cd c = acc / wsum;
      const double metric = std::norm(c) * wsum;
      if (metric > best_metric) {
        best_metric = metric;
        best = g;
        best_c = c;
      }
    }

    const int mu = mirror_bin(d, best);
    const bool self_conjugate = mu == best;
    cd delta = cfg.gamma * best_c;
    if (self_conjugate) delta = {delta.real(), 0.0};
    accumulate(model, best, mu, delta);
    model.selections.push_back(best);
    if (cfg.record_trace) model.trace.push_back({it, best, std::abs(delta)});

    const BinCoord k = decompose(d, best);
    const double scale = self_conjugate ? 1.0 : 2.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& s = samples[i];
      const cd phi = pm[idx(k.km, s.m, d.m)] * pn[idx(k.kn, s.n, d.n)] * pp[idx(k.kp, s.q, d.p)];
      r[i] -= scale * (delta * phi).real();
    }
    if (cfg.track_energy) model.energy.push_back(energy());
    ++model.iterations_run;
  }
  return model;
}

namespace {

struct NonzeroBin {
  BinCoord k;
  cd c;
};

std::vector<NonzeroBin> nonzero_bins(const SpectralModel& model) {
  std::vector<NonzeroBin> out;
  for (int g : model.selected_set())
    out.push_back({decompose(model.dims, g), model.coeffs[static_cast<std::size_t>(g)]});
  return out;
}

class Renderer {
 public:
  explicit Renderer(const SpectralModel& model)
      : bins_(nonzero_bins(model)),
        rm_(unit_roots(model.dims.m, 1.0)),
        rn_(unit_roots(model.dims.n, 1.0)),
        rp_(unit_roots(model.dims.p, 1.0)),
        d_(model.dims),
        center_(model.center_layer) {}

  cd at(int m, int n, int p) const {
    const int q = temporal_slot(p, center_, d_.p);
    cd g{};
    for (const auto& b : bins_)
      g += b.c * rm_[static_cast<std::size_t>((b.k.km * m) % d_.m)] *
           rn_[static_cast<std::size_t>((b.k.kn * n) % d_.n)] *
           rp_[static_cast<std::size_t>((b.k.kp * q) % d_.p)];
    return g;
  }

 private:
  std::vector<NonzeroBin> bins_;
  std::vector<cd> rm_, rn_, rp_;
  TransformDims d_;
  int center_;
};

}  // namespace

std::vector<double> render_model(const SpectralModel& model, std::span<const VolumeCoord> region) {
  const Renderer render(model);
  std::vector<double> out;
  out.reserve(region.size());
  for (const auto& c : region) {
    if (c.m < 0 || c.n < 0 || c.m >= model.dims.m || c.n >= model.dims.n)
      throw ConfigError("render coordinate outside the transform grid");
    out.push_back(render.at(c.m, c.n, c.p).real());
  }
  return out;
}

std::vector<std::complex<double>> render_complex(const SpectralModel& model, int M, int N, int P) {
  const Renderer render(model);
  std::vector<cd> out;
  out.reserve(static_cast<std::size_t>(M) * N * P);
  for (int p = 0; p < P; ++p)
    for (int n = 0; n < N; ++n)
      for (int m = 0; m < M; ++m) out.push_back(render.at(m, n, p));
  return out;
}

double weighted_residual_energy(const ExtrapolationVolume& vol, const WeightVolume& w,
                                const SpectralModel& model) {
  const Renderer render(model);
  double e = 0.0;
  for (int p = 0; p < vol.P; ++p)
    for (int n = 0; n < vol.N; ++n)
      for (int m = 0; m < vol.M; ++m) {
        const std::size_t i = vol.index(m, n, p);
        if (w.weights[i] <= 0.0) continue;
        const double diff = vol.samples[i] - render.at(m, n, p).real();
        e += w.weights[i] * diff * diff;
      }
  return e;
}

void write_trace_csv(const SpectralModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << "iteration,bin,km,kn,kp,magnitude\n";
  out.precision(17);
  for (const auto& t : model.trace) {
    const BinCoord k = decompose(model.dims, t.bin);
    out << t.iteration << ',' << t.bin << ',' << k.km << ',' << k.kn << ',' << k.kp << ','
        << t.magnitude << '\n';
  }
  if (!out) throw DataError("write failure in " + path.string());
}

}  // namespace camfse
