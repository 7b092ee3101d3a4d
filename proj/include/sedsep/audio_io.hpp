#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace sedsep {

inline constexpr int kCanonicalSampleRate = 16000;

// Mono audio signal. Samples are finite and nominally within [-1, 1].
// Instances are immutable once constructed.
class Waveform {
 public:
  Waveform() = default;
  // Throws BadConfig on a non-positive rate or non-finite samples.
  Waveform(std::vector<double> samples, int sample_rate);

  static Waveform zeros(std::size_t length, int sample_rate);

  std::span<const double> samples() const noexcept { return samples_; }
  const std::vector<double>& data() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  int sample_rate() const noexcept { return sample_rate_; }
  double duration() const noexcept {
    return sample_rate_ > 0 ? static_cast<double>(samples_.size()) / sample_rate_ : 0.0;
  }
  double operator[](std::size_t i) const noexcept { return samples_[i]; }

  bool operator==(const Waveform&) const = default;

 private:
  std::vector<double> samples_;
  int sample_rate_ = kCanonicalSampleRate;
};

enum class SampleFormat { kPcm16, kFloat32 };

struct WavWriteResult {
  // Number of samples outside [-1, 1] that were clipped (PCM16 only).
  std::size_t clipped_samples = 0;
};

// Reads a mono PCM16 or IEEE float32 RIFF/WAVE file.
Waveform read_wav(const std::filesystem::path& path);

WavWriteResult write_wav(const Waveform& w, const std::filesystem::path& path,
                         SampleFormat format = SampleFormat::kPcm16);

// Throws RateMismatch or LengthMismatch.
void assert_compatible(const Waveform& a, const Waveform& b);

// Sum of squares.
double energy(std::span<const double> x);

}  // namespace sedsep
