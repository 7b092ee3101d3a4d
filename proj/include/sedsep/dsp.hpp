#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "sedsep/audio_io.hpp"

namespace sedsep {

// 32 ms window, 8 ms hop at 16 kHz.
struct StftConfig {
  std::size_t window_length = 512;
  std::size_t hop = 128;
};

enum class WindowKind { kSqrtHann };

// Complex spectrogram, row-major T x F with F = window_length / 2 + 1.
struct StftGrid {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::size_t window_length = 0;
  std::size_t hop = 0;
  WindowKind window = WindowKind::kSqrtHann;
  int sample_rate = kCanonicalSampleRate;
  std::vector<std::complex<double>> values;

  std::complex<double>& at(std::size_t t, std::size_t f) { return values[t * bins + f]; }
  const std::complex<double>& at(std::size_t t, std::size_t f) const {
    return values[t * bins + f];
  }
};

// Real masks, M x T x F, values in [0, 1].
struct MaskGrid {
  std::size_t sources = 0;
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<double> values;

  MaskGrid() = default;
  MaskGrid(std::size_t m, std::size_t t, std::size_t f, double fill = 0.0)
      : sources(m), frames(t), bins(f), values(m * t * f, fill) {}

  double& at(std::size_t m, std::size_t t, std::size_t f) {
    return values[(m * frames + t) * bins + f];
  }
  double at(std::size_t m, std::size_t t, std::size_t f) const {
    return values[(m * frames + t) * bins + f];
  }
};

// Periodic square-root Hann window.
std::vector<double> sqrt_hann(std::size_t length);

// Throws BadConfig unless 0 < hop <= window_length and hop divides window_length.
void validate(const StftConfig& cfg);

// Centered STFT: the signal is reflect-padded by window_length/2 on both ends
// and yields 1 + len/hop frames.
StftGrid stft(const Waveform& w, const StftConfig& cfg = {});

// Weighted overlap-add inverse, normalized by the summed squared window so the
// round trip is exact wherever the window coverage is non-zero.
Waveform istft(const StftGrid& g, std::size_t target_length);

// source_i = istft(mask_i * g). Throws ShapeMismatch.
std::vector<Waveform> apply_masks(const StftGrid& g, const MaskGrid& masks,
                                  std::size_t target_length);

// output_i = source_i + weight_i * (mixture - sum_j source_j).
// Empty weights means uniform 1/M. Throws LengthMismatch or BadWeights.
std::vector<Waveform> mixture_consistency(std::span<const Waveform> sources,
                                          const Waveform& mixture,
                                          std::span<const double> weights = {});

// Real <-> half-spectrum DFT of arbitrary size, unnormalized forward.
void rfft(std::span<const double> in, std::span<std::complex<double>> out);
void irfft(std::span<const std::complex<double>> in, std::span<double> out);

}  // namespace sedsep
