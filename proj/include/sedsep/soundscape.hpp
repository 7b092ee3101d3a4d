#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sedsep/audio_io.hpp"
#include "sedsep/events.hpp"
#include "sedsep/rng.hpp"
#include "sedsep/source_set.hpp"
#include "sedsep/task_scheme.hpp"

namespace sedsep {

template <typename T>
struct Range {
  T min{};
  T max{};
};

struct MixSpec {
  std::uint64_t seed = 0;
  double duration = 10.0;  // s
  int sample_rate = kCanonicalSampleRate;
  // Sources per FUSS mixture, background included.
  Range<int> fuss_sources{1, 4};
  // Foreground DESED events per clip.
  Range<int> event_count{0, 5};
  // Foreground event RMS relative to the background over the event support.
  Range<double> snr_db{6.0, 30.0};
  Range<double> event_duration{0.5, 5.0};  // s
  // Level of the FUSS mix relative to the DESED background.
  Range<double> fuss_level_db{-6.0, 6.0};
  // Probability that a DESED+FUSS clip contains a FUSS component at all.
  double fuss_probability = 0.5;
  double background_rms = 0.01;
  std::vector<std::string> class_inventory = desed_classes();
  // Optional impulse responses; when non-empty every source is convolved with
  // one of them (seeded choice).
  std::vector<Waveform> impulse_responses;

  // Throws BadConfig / BadScheme (when the event range cannot fit `scheme`).
  void validate(const TaskScheme& scheme) const;
};

// Isolated source material. Implementations must be deterministic given the
// generator state.
class SourceBank {
 public:
  virtual ~SourceBank() = default;
  virtual std::vector<double> background(Rng& rng, std::size_t n, int sample_rate) const = 0;
  virtual std::vector<double> event(const std::string& label, Rng& rng, std::size_t n,
                                    int sample_rate) const = 0;
  virtual std::vector<double> fuss_source(Rng& rng, std::size_t n, int sample_rate) const = 0;
  // Full-duration FUSS background; must not be gated.
  virtual std::vector<double> fuss_background(Rng& rng, std::size_t n, int sample_rate) const {
    return fuss_source(rng, n, sample_rate);
  }
};

// Seeded tones, chirps, and band-limited noise with class-specific bands.
class ProceduralBank final : public SourceBank {
 public:
  std::vector<double> background(Rng& rng, std::size_t n, int sample_rate) const override;
  std::vector<double> event(const std::string& label, Rng& rng, std::size_t n,
                            int sample_rate) const override;
  std::vector<double> fuss_source(Rng& rng, std::size_t n, int sample_rate) const override;
  std::vector<double> fuss_background(Rng& rng, std::size_t n, int sample_rate) const override;
};

// Directory layout: <root>/background/*.wav, <root>/fuss/*.wav and one
// <root>/<class>/*.wav folder per class. Files are looped or cropped.
class WavDirectoryBank final : public SourceBank {
 public:
  // Throws BankExhausted when a required folder is missing or empty.
  explicit WavDirectoryBank(const std::filesystem::path& root,
                            const std::vector<std::string>& classes);

  std::vector<double> background(Rng& rng, std::size_t n, int sample_rate) const override;
  std::vector<double> event(const std::string& label, Rng& rng, std::size_t n,
                            int sample_rate) const override;
  std::vector<double> fuss_source(Rng& rng, std::size_t n, int sample_rate) const override;

 private:
  std::vector<double> pick(const std::string& category, Rng& rng, std::size_t n,
                           int sample_rate) const;
  std::map<std::string, std::vector<Waveform>> files_;
};

struct PlacedEvent {
  Waveform audio;  // full clip length, silent outside the event support
  Event event;
};

// Raw material of one clip before it is arranged into scheme slots.
struct ClipRoles {
  std::optional<Waveform> desed_background;
  std::vector<PlacedEvent> foreground;
  // fuss[0] is the FUSS background when present.
  std::vector<Waveform> fuss;
  std::size_t length = 0;
  int sample_rate = kCanonicalSampleRate;
};

struct GeneratedClip {
  std::string clip_id;
  Waveform mixture;
  SourceSet refs;
  EventList truth;
};

// Fills scheme slots from roles. Unused slots are zero and inactive.
// Throws TooManyEvents, BadScheme.
SourceSet build_task_targets(const ClipRoles& roles, const TaskScheme& scheme);

std::string clip_name(std::uint64_t seed, std::size_t index);

// Draws the roles of clip `index` with seed spec.seed + index.
ClipRoles draw_roles(const MixSpec& spec, const TaskScheme& scheme, const SourceBank& bank,
                     std::size_t index);

// The mixture is the slot-order sum of the reference slots.
GeneratedClip generate_clip(const MixSpec& spec, const TaskScheme& scheme, const SourceBank& bank,
                            std::size_t index);

struct DatasetManifest {
  std::string scheme;
  std::uint64_t seed = 0;
  int sample_rate = kCanonicalSampleRate;
  double clip_duration = 10.0;
  struct Clip {
    std::string clip_id;
    std::string mixture;
    std::vector<std::string> slots;  // relative path or "zero"
    std::vector<bool> active;
    std::vector<std::string> labels;
  };
  std::vector<Clip> clips;
};

std::string manifest_to_json(const DatasetManifest& m);
// Throws MalformedManifest.
DatasetManifest manifest_from_json(const std::string& text);

// Writes audio/<clip>.wav, sources/<clip>_s<k>.wav (active slots only),
// ground_truth.tsv and manifest.json under out_dir. Throws IoFailure.
DatasetManifest export_dataset(const std::vector<GeneratedClip>& clips, const TaskScheme& scheme,
                               const MixSpec& spec, const std::filesystem::path& out_dir);

// Linear convolution truncated to the input length.
std::vector<double> convolve_truncated(std::span<const double> x, std::span<const double> ir);

}  // namespace sedsep
