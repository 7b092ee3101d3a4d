#include "sedsep/dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "sedsep/error.hpp"

namespace sedsep {

namespace {

struct FftwBuffer {
  void operator()(void* p) const { fftw_free(p); }
};

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

// FFTW planning is not thread-safe; execution with the new-array interface is.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  PlanPair get(std::size_t n) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    const int size = static_cast<int>(n);
    std::unique_ptr<double, FftwBuffer> real(fftw_alloc_real(n));
    std::unique_ptr<fftw_complex, FftwBuffer> spec(fftw_alloc_complex(n / 2 + 1));
    PlanPair pair;
    pair.forward = fftw_plan_dft_r2c_1d(size, real.get(), spec.get(), FFTW_ESTIMATE);
    pair.inverse = fftw_plan_dft_c2r_1d(size, spec.get(), real.get(), FFTW_ESTIMATE);
    plans_.emplace(n, pair);
    return pair;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [n, pair] : plans_) {
      fftw_destroy_plan(pair.forward);
      fftw_destroy_plan(pair.inverse);
    }
  }

  std::mutex mutex_;
  std::map<std::size_t, PlanPair> plans_;
};

// Reflection about the first and last sample, repeated as needed so that any
// signal length (including 1) can be padded.
std::size_t reflect_index(std::ptrdiff_t i, std::size_t len) {
  if (len == 1) return 0;
  const auto period = static_cast<std::ptrdiff_t>(2 * (len - 1));
  std::ptrdiff_t m = i % period;
  if (m < 0) m += period;
  if (m >= static_cast<std::ptrdiff_t>(len)) m = period - m;
  return static_cast<std::size_t>(m);
}

}  // namespace

void rfft(std::span<const double> in, std::span<std::complex<double>> out) {
  const std::size_t n = in.size();
  if (out.size() != n / 2 + 1) raise(errc::kShapeMismatch, "rfft output size mismatch");
  const PlanPair plan = PlanCache::instance().get(n);
  std::unique_ptr<double, FftwBuffer> real(fftw_alloc_real(n));
  std::unique_ptr<fftw_complex, FftwBuffer> spec(fftw_alloc_complex(n / 2 + 1));
  std::copy(in.begin(), in.end(), real.get());
  fftw_execute_dft_r2c(plan.forward, real.get(), spec.get());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = {spec.get()[k][0], spec.get()[k][1]};
}

void irfft(std::span<const std::complex<double>> in, std::span<double> out) {
  const std::size_t n = out.size();
  if (in.size() != n / 2 + 1) raise(errc::kShapeMismatch, "irfft input size mismatch");
  const PlanPair plan = PlanCache::instance().get(n);
  std::unique_ptr<double, FftwBuffer> real(fftw_alloc_real(n));
  std::unique_ptr<fftw_complex, FftwBuffer> spec(fftw_alloc_complex(n / 2 + 1));
  for (std::size_t k = 0; k < in.size(); ++k) {
    spec.get()[k][0] = in[k].real();
    spec.get()[k][1] = in[k].imag();
  }
  fftw_execute_dft_c2r(plan.inverse, spec.get(), real.get());
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = real.get()[i] * scale;
}

std::vector<double> sqrt_hann(std::size_t length) {
  std::vector<double> w(length);
  for (std::size_t n = 0; n < length; ++n) {
    const double hann =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / length);
    w[n] = std::sqrt(hann);
  }
  return w;
}

void validate(const StftConfig& cfg) {
  if (cfg.window_length < 2 || cfg.hop == 0) {
    raise(errc::kBadConfig, "window_length must be >= 2 and hop > 0");
  }
  if (cfg.hop > cfg.window_length) {
    raise(errc::kBadConfig, "hop " + std::to_string(cfg.hop) + " exceeds window length " +
                                std::to_string(cfg.window_length));
  }
  if (cfg.window_length % cfg.hop != 0) {
    raise(errc::kBadConfig, "window length must be a multiple of hop");
  }
}

StftGrid stft(const Waveform& w, const StftConfig& cfg) {
  validate(cfg);
  if (w.empty()) raise(errc::kBadConfig, "stft of an empty waveform");
  const std::size_t len = w.size();
  const std::size_t win = cfg.window_length;
  const std::size_t half = win / 2;
  const auto window = sqrt_hann(win);

  StftGrid g;
  g.window_length = win;
  g.hop = cfg.hop;
  g.sample_rate = w.sample_rate();
  g.bins = win / 2 + 1;
  g.frames = 1 + len / cfg.hop;
  g.values.resize(g.frames * g.bins);

  std::vector<double> frame(win);
  const auto x = w.samples();
  for (std::size_t t = 0; t < g.frames; ++t) {
    const auto start = static_cast<std::ptrdiff_t>(t * cfg.hop) - static_cast<std::ptrdiff_t>(half);
    for (std::size_t n = 0; n < win; ++n) {
      frame[n] = window[n] * x[reflect_index(start + static_cast<std::ptrdiff_t>(n), len)];
    }
    rfft(frame, std::span(g.values).subspan(t * g.bins, g.bins));
  }
  return g;
}

Waveform istft(const StftGrid& g, std::size_t target_length) {
  validate({g.window_length, g.hop});
  if (g.bins != g.window_length / 2 + 1 || g.values.size() != g.frames * g.bins) {
    raise(errc::kBadConfig, "inconsistent STFT grid dimensions");
  }
  const std::size_t win = g.window_length;
  const std::size_t half = win / 2;
  const auto window = sqrt_hann(win);

  // Overlap-add in padded coordinates, then crop the centre.
  const std::size_t padded = (g.frames == 0 ? 0 : (g.frames - 1) * g.hop) + win;
  std::vector<double> acc(padded, 0.0);
  std::vector<double> norm(padded, 0.0);
  std::vector<double> frame(win);
  for (std::size_t t = 0; t < g.frames; ++t) {
    irfft(std::span(g.values).subspan(t * g.bins, g.bins), frame);
    const std::size_t start = t * g.hop;
    for (std::size_t n = 0; n < win; ++n) {
      acc[start + n] += window[n] * frame[n];
      norm[start + n] += window[n] * window[n];
    }
  }

  std::vector<double> out(target_length, 0.0);
  for (std::size_t i = 0; i < target_length; ++i) {
    const std::size_t p = i + half;
    if (p < padded && norm[p] > 1e-10) out[i] = acc[p] / norm[p];
  }
  return Waveform(std::move(out), g.sample_rate);
}

std::vector<Waveform> apply_masks(const StftGrid& g, const MaskGrid& masks,
                                  std::size_t target_length) {
  if (masks.frames != g.frames || masks.bins != g.bins ||
      masks.values.size() != masks.sources * masks.frames * masks.bins) {
    raise(errc::kShapeMismatch, "mask grid " + std::to_string(masks.frames) + "x" +
                                    std::to_string(masks.bins) + " does not match STFT " +
                                    std::to_string(g.frames) + "x" + std::to_string(g.bins));
  }
  std::vector<Waveform> out;
  out.reserve(masks.sources);
  StftGrid masked = g;
  for (std::size_t m = 0; m < masks.sources; ++m) {
    for (std::size_t t = 0; t < g.frames; ++t) {
      for (std::size_t f = 0; f < g.bins; ++f) masked.at(t, f) = g.at(t, f) * masks.at(m, t, f);
    }
    out.push_back(istft(masked, target_length));
  }
  return out;
}

std::vector<Waveform> mixture_consistency(std::span<const Waveform> sources,
                                          const Waveform& mixture,
                                          std::span<const double> weights) {
  const std::size_t m = sources.size();
  if (m == 0) raise(errc::kBadWeights, "mixture consistency needs at least one source");
  for (const auto& s : sources) {
    if (s.size() != mixture.size()) {
      raise(errc::kLengthMismatch, "source length " + std::to_string(s.size()) +
                                       " differs from mixture length " +
                                       std::to_string(mixture.size()));
    }
  }
  std::vector<double> w;
  if (weights.empty()) {
    w.assign(m, 1.0 / static_cast<double>(m));
  } else {
    if (weights.size() != m) raise(errc::kBadWeights, "one weight per source required");
    double total = 0.0;
    for (double v : weights) {
      if (!(v >= 0.0)) raise(errc::kBadWeights, "weights must be non-negative");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-6) raise(errc::kBadWeights, "weights must sum to 1");
    w.assign(weights.begin(), weights.end());
  }

  const std::size_t n = mixture.size();
  std::vector<double> residual(mixture.data());
  for (const auto& s : sources) {
    for (std::size_t i = 0; i < n; ++i) residual[i] -= s[i];
  }
  std::vector<Waveform> out;
  out.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> y(sources[j].data());
    for (std::size_t i = 0; i < n; ++i) y[i] += w[j] * residual[i];
    out.emplace_back(std::move(y), mixture.sample_rate());
  }
  return out;
}

}  // namespace sedsep
