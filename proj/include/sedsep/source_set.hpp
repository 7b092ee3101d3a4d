#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sedsep/audio_io.hpp"

namespace sedsep {

// Fixed number of waveform slots. Inactive slots hold all-zero waveforms;
// this is how an M-output separator represents a mixture of N <= M sources.
struct SourceSet {
  std::vector<Waveform> slots;
  std::vector<bool> active;
  std::vector<std::string> labels;
  std::vector<std::string> groups;

  std::size_t size() const noexcept { return slots.size(); }
  std::size_t active_count() const;
  std::size_t length() const { return slots.empty() ? 0 : slots.front().size(); }
  int sample_rate() const { return slots.empty() ? kCanonicalSampleRate : slots.front().sample_rate(); }

  // Sample-wise sum of all slots in slot order.
  Waveform sum() const;

  // Throws LengthMismatch / RateMismatch / ShapeMismatch / BadConfig.
  void validate() const;

  static SourceSet zeros(std::size_t m, std::size_t length, int sample_rate);
};

}  // namespace sedsep
