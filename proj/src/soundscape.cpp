#include "sedsep/soundscape.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include "json.hpp"

#include "sedsep/dsp.hpp"
#include "sedsep/error.hpp"
#include "sedsep/text_io.hpp"

namespace sedsep {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kFadeSeconds = 0.005;

double rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::sqrt(energy(x) / static_cast<double>(x.size()));
}

void normalize_rms(std::vector<double>& x, double target) {
  const double r = rms(x);
  if (r <= 0.0) return;
  for (double& v : x) v *= target / r;
}

// RBJ band-pass biquad (0 dB peak), applied twice for steeper skirts.
void bandpass(std::vector<double>& x, double lo, double hi, int sample_rate) {
  const double nyquist = 0.5 * sample_rate;
  hi = std::min(hi, 0.95 * nyquist);
  lo = std::clamp(lo, 10.0, 0.9 * hi);
  const double f0 = std::sqrt(lo * hi);
  const double q = f0 / (hi - lo);
  const double w0 = kTwoPi * f0 / sample_rate;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  const double b0 = alpha / a0, b2 = -alpha / a0;
  const double a1 = -2.0 * std::cos(w0) / a0, a2 = (1.0 - alpha) / a0;
  for (int pass = 0; pass < 2; ++pass) {
    double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
    for (double& v : x) {
      const double y = b0 * v + b2 * x2 - a1 * y1 - a2 * y2;
      x2 = x1;
      x1 = v;
      y2 = y1;
      y1 = y;
      v = y;
    }
  }
}

std::vector<double> white(Rng& rng, std::size_t n) {
  std::vector<double> x(n);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  return x;
}

std::vector<double> band_noise(Rng& rng, std::size_t n, double lo, double hi, int sr) {
  auto x = white(rng, n);
  bandpass(x, lo, hi, sr);
  return x;
}

// Harmonic tone with optional vibrato; f0 may sweep linearly to f1.
std::vector<double> harmonic(std::size_t n, double f0, double f1, int harmonics, double rolloff,
                             double vibrato_hz, double vibrato_depth, int sr) {
  std::vector<double> x(n, 0.0);
  double phase = 0.0;
  const double nyquist = 0.5 * sr;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sr;
    const double frac = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
    double f = f0 + (f1 - f0) * frac;
    f *= 1.0 + vibrato_depth * std::sin(kTwoPi * vibrato_hz * t);
    phase += kTwoPi * f / sr;
    double v = 0.0;
    double amp = 1.0;
    for (int h = 1; h <= harmonics; ++h) {
      if (f * h >= nyquist) break;
      v += amp * std::sin(h * phase);
      amp *= rolloff;
    }
    x[i] = v;
  }
  return x;
}

void amplitude_modulate(std::vector<double>& x, double rate_hz, double depth, double phase,
                        int sr) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = static_cast<double>(i) / sr;
    x[i] *= 1.0 - depth * 0.5 * (1.0 + std::sin(kTwoPi * rate_hz * t + phase));
  }
}

// Rectangular on/off gate with 2 ms ramps.
void gate(std::vector<double>& x, double on_s, double off_s, int sr) {
  const double period = on_s + off_s;
  const double ramp = 0.002;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = std::fmod(static_cast<double>(i) / sr, period);
    double g = 0.0;
    if (t < on_s) g = std::min({1.0, t / ramp, (on_s - t) / ramp});
    x[i] *= g;
  }
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void apply_fades(std::vector<double>& x, int sr) {
  const auto fade = std::min<std::size_t>(x.size() / 2,
                                          static_cast<std::size_t>(kFadeSeconds * sr));
  for (std::size_t i = 0; i < fade; ++i) {
    const double g = 0.5 - 0.5 * std::cos(std::numbers::pi * (i + 0.5) / fade);
    x[i] *= g;
    x[x.size() - 1 - i] *= g;
  }
}

std::vector<double> fit_length(const Waveform& w, Rng& rng, std::size_t n) {
  std::vector<double> out(n, 0.0);
  if (w.empty()) return out;
  const std::size_t start =
      w.size() > n ? static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(w.size() - n)))
                   : 0;
  for (std::size_t i = 0; i < n; ++i) out[i] = w[(start + i) % w.size()];
  return out;
}

std::size_t individual_slots(const TaskScheme& scheme, std::string_view label) {
  return static_cast<std::size_t>(std::count_if(
      scheme.slots.begin(), scheme.slots.end(), [&](const auto& s) { return s.label == label; }));
}

bool needs_desed(const TaskScheme& scheme) {
  return std::any_of(scheme.slots.begin(), scheme.slots.end(),
                     [](const auto& s) { return s.label.rfind("desed", 0) == 0; });
}

constexpr double kSameClassGap = 0.5;

struct Placement {
  std::size_t start = 0;
  std::size_t length = 0;
  double onset = 0.0;
  double offset = 0.0;
};

// Millisecond-aligned onset and duration so that 3-decimal TSV times are exact.
Placement draw_placement(Rng& rng, const MixSpec& spec) {
  const auto clip_ms = static_cast<std::int64_t>(std::llround(spec.duration * 1000.0));
  const auto min_ms = std::max<std::int64_t>(
      1, std::min(clip_ms, static_cast<std::int64_t>(std::llround(spec.event_duration.min * 1000.0))));
  const auto max_ms = std::max(
      min_ms, std::min(clip_ms, static_cast<std::int64_t>(std::llround(spec.event_duration.max * 1000.0))));
  const std::int64_t dur_ms = rng.uniform_int(min_ms, max_ms);
  const std::int64_t onset_ms = rng.uniform_int(0, clip_ms - dur_ms);
  Placement p;
  p.onset = static_cast<double>(onset_ms) / 1000.0;
  p.offset = static_cast<double>(onset_ms + dur_ms) / 1000.0;
  p.start = static_cast<std::size_t>(std::llround(p.onset * spec.sample_rate));
  const auto end = static_cast<std::size_t>(std::llround(p.offset * spec.sample_rate));
  p.length = end - p.start;
  return p;
}

// Places `material` at `p` with RMS `snr_db` above `reference` over the same
// support.
std::vector<double> place(std::vector<double> material, const Placement& p,
                          std::span<const double> reference, double snr_db,
                          double fallback_rms, std::size_t total, int sr) {
  apply_fades(material, sr);
  double ref_rms = rms(reference.subspan(p.start, p.length));
  if (ref_rms <= 0.0) ref_rms = rms(reference);
  if (ref_rms <= 0.0) ref_rms = fallback_rms;
  normalize_rms(material, ref_rms * std::pow(10.0, snr_db / 20.0));
  std::vector<double> out(total, 0.0);
  std::copy(material.begin(), material.end(), out.begin() + static_cast<std::ptrdiff_t>(p.start));
  return out;
}

void maybe_reverberate(std::vector<double>& x, Rng& rng, const MixSpec& spec) {
  if (spec.impulse_responses.empty()) return;
  const auto k = static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(spec.impulse_responses.size()) - 1));
  x = convolve_truncated(x, spec.impulse_responses[k].samples());
}

void add_into(std::vector<double>& acc, std::span<const double> x) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += x[i];
}

}  // namespace

void MixSpec::validate(const TaskScheme& scheme) const {
  if (!(duration > 0.0)) raise(errc::kBadConfig, "duration must be positive");
  if (sample_rate <= 0) raise(errc::kBadConfig, "sample rate must be positive");
  if (fuss_sources.min < 1 || fuss_sources.max < fuss_sources.min) {
    raise(errc::kBadConfig, "FUSS source range must satisfy 1 <= min <= max");
  }
  if (event_count.min < 0 || event_count.max < event_count.min) {
    raise(errc::kBadConfig, "event count range must satisfy 0 <= min <= max");
  }
  if (snr_db.max < snr_db.min || fuss_level_db.max < fuss_level_db.min) {
    raise(errc::kBadConfig, "level ranges must be non-empty");
  }
  if (!(event_duration.min > 0.0) || event_duration.max < event_duration.min) {
    raise(errc::kBadConfig, "event duration range must be positive and non-empty");
  }
  if (!(fuss_probability >= 0.0 && fuss_probability <= 1.0)) {
    raise(errc::kBadConfig, "fuss_probability must lie in [0, 1]");
  }
  if (!(background_rms > 0.0)) raise(errc::kBadConfig, "background_rms must be positive");
  if (class_inventory.empty()) raise(errc::kBadConfig, "class inventory is empty");
  for (const auto& ir : impulse_responses) {
    if (ir.sample_rate() != sample_rate) {
      raise(errc::kRateMismatch, "impulse response rate differs from the mix rate");
    }
  }
  const std::size_t fg_slots = individual_slots(scheme, "desed_fg");
  if (fg_slots > 0 && static_cast<std::size_t>(event_count.max) > fg_slots) {
    raise(errc::kBadScheme, scheme.name + " has " + std::to_string(fg_slots) +
                                " foreground slots but up to " + std::to_string(event_count.max) +
                                " events may be drawn");
  }
  const std::size_t fuss_slots = individual_slots(scheme, "fuss_src");
  if (fuss_slots > 0 && static_cast<std::size_t>(fuss_sources.max) > fuss_slots) {
    raise(errc::kBadScheme, scheme.name + " has " + std::to_string(fuss_slots) +
                                " FUSS slots but up to " + std::to_string(fuss_sources.max) +
                                " FUSS sources may be drawn");
  }
}

std::vector<double> ProceduralBank::background(Rng& rng, std::size_t n, int sr) const {
  // Leaky-integrated (brownish) noise with a slow level drift.
  auto x = white(rng, n);
  double state = 0.0;
  for (double& v : x) {
    state = 0.995 * state + 0.1 * v;
    v = state;
  }
  bandpass(x, 40.0, 0.45 * sr, sr);
  amplitude_modulate(x, rng.uniform(0.05, 0.3), 0.3, rng.uniform(0.0, kTwoPi), sr);
  normalize_rms(x, 1.0);
  return x;
}

std::vector<double> ProceduralBank::event(const std::string& label, Rng& rng, std::size_t n,
                                          int sr) const {
  std::vector<double> x;
  if (label == "Alarm_bell_ringing") {
    const double f = rng.uniform(1800.0, 2600.0);
    x = harmonic(n, f, f, 3, 0.5, 0.0, 0.0, sr);
    amplitude_modulate(x, rng.uniform(8.0, 12.0), 0.8, 0.0, sr);
  } else if (label == "Blender") {
    x = band_noise(rng, n, 300.0, 2500.0, sr);
    amplitude_modulate(x, rng.uniform(20.0, 40.0), 0.3, 0.0, sr);
  } else if (label == "Cat") {
    const double f = rng.uniform(450.0, 650.0);
    x = harmonic(n, f, f * rng.uniform(1.3, 1.7), 4, 0.6, 6.0, 0.03, sr);
  } else if (label == "Dishes") {
    x = band_noise(rng, n, 2500.0, 6000.0, sr);
    gate(x, rng.uniform(0.02, 0.05), rng.uniform(0.08, 0.3), sr);
  } else if (label == "Dog") {
    const double f = rng.uniform(300.0, 600.0);
    x = harmonic(n, f, f * 0.8, 6, 0.7, 0.0, 0.0, sr);
    gate(x, rng.uniform(0.12, 0.2), rng.uniform(0.15, 0.35), sr);
  } else if (label == "Electric_shaver_toothbrush") {
    const double f = rng.uniform(80.0, 160.0);
    x = harmonic(n, f, f, 24, 0.85, 0.0, 0.0, sr);
  } else if (label == "Frying") {
    x = band_noise(rng, n, 3000.0, 7000.0, sr);
    for (double& v : x) v *= rng.bernoulli(0.05) ? 4.0 : 0.5;
  } else if (label == "Running_water") {
    x = band_noise(rng, n, 800.0, 4000.0, sr);
    amplitude_modulate(x, rng.uniform(2.0, 6.0), 0.2, 0.0, sr);
  } else if (label == "Speech") {
    const double f = rng.uniform(110.0, 220.0);
    x = harmonic(n, f, f * rng.uniform(0.8, 1.2), 12, 0.75, 5.0, 0.08, sr);
    amplitude_modulate(x, rng.uniform(3.0, 5.0), 0.9, rng.uniform(0.0, kTwoPi), sr);
  } else if (label == "Vacuum_cleaner") {
    x = band_noise(rng, n, 150.0, 1200.0, sr);
    auto hum = harmonic(n, rng.uniform(250.0, 350.0), 300.0, 2, 0.5, 0.0, 0.0, sr);
    for (std::size_t i = 0; i < n; ++i) x[i] += 0.05 * hum[i];
  } else {
    // Classes outside the DESED inventory get a stable label-derived band.
    const double lo = 200.0 * std::pow(2.0, static_cast<double>(fnv1a(label) % 40) / 10.0);
    x = band_noise(rng, n, lo, lo * 2.0, sr);
  }
  normalize_rms(x, 1.0);
  return x;
}

std::vector<double> ProceduralBank::fuss_background(Rng& rng, std::size_t n, int sr) const {
  const double lo = 100.0 * std::pow(2.0, rng.uniform(0.0, 4.0));
  auto x = band_noise(rng, n, lo, lo * rng.uniform(2.0, 6.0), sr);
  normalize_rms(x, 1.0);
  return x;
}

std::vector<double> ProceduralBank::fuss_source(Rng& rng, std::size_t n, int sr) const {
  const auto kind = rng.uniform_int(0, 2);
  const double lo = 100.0 * std::pow(2.0, rng.uniform(0.0, 5.0));
  std::vector<double> x;
  if (kind == 0) {
    x = band_noise(rng, n, lo, lo * rng.uniform(1.5, 4.0), sr);
  } else if (kind == 1) {
    x = harmonic(n, lo, lo * rng.uniform(0.5, 2.0), static_cast<int>(rng.uniform_int(1, 8)),
                 0.7, rng.uniform(0.0, 6.0), 0.02, sr);
  } else {
    x = band_noise(rng, n, lo, lo * 2.0, sr);
    gate(x, rng.uniform(0.05, 0.3), rng.uniform(0.05, 0.5), sr);
  }
  normalize_rms(x, 1.0);
  return x;
}

WavDirectoryBank::WavDirectoryBank(const std::filesystem::path& root,
                                   const std::vector<std::string>& classes) {
  std::vector<std::string> categories = {"background", "fuss"};
  categories.insert(categories.end(), classes.begin(), classes.end());
  for (const auto& cat : categories) {
    const auto dir = root / cat;
    std::vector<std::filesystem::path> paths;
    if (std::filesystem::is_directory(dir)) {
      for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() == ".wav") paths.push_back(entry.path());
      }
    }
    if (paths.empty()) raise(errc::kBankExhausted, "no WAV files in " + dir.string());
    std::sort(paths.begin(), paths.end());
    auto& files = files_[cat];
    for (const auto& p : paths) files.push_back(read_wav(p));
  }
}

std::vector<double> WavDirectoryBank::pick(const std::string& category, Rng& rng, std::size_t n,
                                           int sample_rate) const {
  const auto it = files_.find(category);
  if (it == files_.end() || it->second.empty()) {
    raise(errc::kBankExhausted, "source bank has no material for '" + category + "'");
  }
  const auto& files = it->second;
  const auto& w = files[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(files.size()) - 1))];
  if (w.sample_rate() != sample_rate) {
    raise(errc::kRateMismatch, "bank file rate " + std::to_string(w.sample_rate()) +
                                   " differs from mix rate " + std::to_string(sample_rate));
  }
  auto x = fit_length(w, rng, n);
  normalize_rms(x, 1.0);
  return x;
}

std::vector<double> WavDirectoryBank::background(Rng& rng, std::size_t n, int sr) const {
  return pick("background", rng, n, sr);
}

std::vector<double> WavDirectoryBank::event(const std::string& label, Rng& rng, std::size_t n,
                                            int sr) const {
  return pick(label, rng, n, sr);
}

std::vector<double> WavDirectoryBank::fuss_source(Rng& rng, std::size_t n, int sr) const {
  return pick("fuss", rng, n, sr);
}

std::vector<double> convolve_truncated(std::span<const double> x, std::span<const double> ir) {
  const std::size_t n = x.size();
  if (n == 0 || ir.empty()) return std::vector<double>(n, 0.0);
  std::size_t size = 1;
  while (size < n + ir.size() - 1) size <<= 1;
  std::vector<double> a(size, 0.0), b(size, 0.0);
  std::copy(x.begin(), x.end(), a.begin());
  std::copy(ir.begin(), ir.end(), b.begin());
  std::vector<std::complex<double>> fa(size / 2 + 1), fb(size / 2 + 1);
  rfft(a, fa);
  rfft(b, fb);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  irfft(fa, a);
  a.resize(n);
  return a;
}

std::string clip_name(std::uint64_t seed, std::size_t index) {
  return "clip_" + std::to_string(seed) + "_" + std::to_string(index);
}

ClipRoles draw_roles(const MixSpec& spec, const TaskScheme& scheme, const SourceBank& bank,
                     std::size_t index) {
  spec.validate(scheme);
  Rng rng(spec.seed + index);
  const int sr = spec.sample_rate;
  const auto n = static_cast<std::size_t>(std::llround(spec.duration * sr));
  ClipRoles roles;
  roles.length = n;
  roles.sample_rate = sr;

  const bool desed = needs_desed(scheme);
  double fuss_rms = spec.background_rms;
  if (desed) {
    auto bg = bank.background(rng, n, sr);
    normalize_rms(bg, spec.background_rms);
    maybe_reverberate(bg, rng, spec);

    const auto count = rng.uniform_int(spec.event_count.min, spec.event_count.max);
    for (std::int64_t e = 0; e < count; ++e) {
      const auto& label = spec.class_inventory[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(spec.class_inventory.size()) - 1))];
      // Same-class events keep a gap so they stay separable after decoding;
      // give up on the event after a few redraws.
      Placement p;
      bool placed = false;
      for (int attempt = 0; attempt < 8 && !placed; ++attempt) {
        p = draw_placement(rng, spec);
        placed = std::none_of(roles.foreground.begin(), roles.foreground.end(), [&](const auto& f) {
          return f.event.label == label && p.onset < f.event.offset + kSameClassGap &&
                 f.event.onset < p.offset + kSameClassGap;
        });
      }
      if (!placed) continue;
      const double snr = rng.uniform(spec.snr_db.min, spec.snr_db.max);
      auto audio = place(bank.event(label, rng, p.length, sr), p, bg, snr, spec.background_rms,
                         n, sr);
      maybe_reverberate(audio, rng, spec);
      roles.foreground.push_back({Waveform(std::move(audio), sr), {p.onset, p.offset, label}});
    }
    roles.desed_background = Waveform(std::move(bg), sr);
    fuss_rms = spec.background_rms *
               std::pow(10.0, rng.uniform(spec.fuss_level_db.min, spec.fuss_level_db.max) / 20.0);
    if (!rng.bernoulli(spec.fuss_probability)) return roles;
  }

  const auto sources = rng.uniform_int(spec.fuss_sources.min, spec.fuss_sources.max);
  auto fbg = bank.fuss_background(rng, n, sr);
  normalize_rms(fbg, fuss_rms);
  maybe_reverberate(fbg, rng, spec);
  for (std::int64_t s = 1; s < sources; ++s) {
    const Placement p = draw_placement(rng, spec);
    const double snr = rng.uniform(spec.snr_db.min, spec.snr_db.max);
    auto audio = place(bank.fuss_source(rng, p.length, sr), p, fbg, snr, fuss_rms, n, sr);
    maybe_reverberate(audio, rng, spec);
    roles.fuss.emplace_back(std::move(audio), sr);
  }
  roles.fuss.insert(roles.fuss.begin(), Waveform(std::move(fbg), sr));
  return roles;
}

SourceSet build_task_targets(const ClipRoles& roles, const TaskScheme& scheme) {
  const std::size_t n = roles.length;
  const int sr = roles.sample_rate;
  SourceSet out = SourceSet::zeros(scheme.size(), n, sr);
  out.labels = scheme.slot_labels();
  out.groups = scheme.slot_groups();

  std::size_t next_fg = 0;
  std::size_t next_fuss = 0;
  bool individual_fg = false;
  bool individual_fuss = false;
  for (std::size_t i = 0; i < scheme.size(); ++i) {
    const std::string& label = scheme.slots[i].label;
    std::vector<double> acc(n, 0.0);
    bool contributed = false;
    auto add = [&](const Waveform& w) {
      add_into(acc, w.samples());
      contributed = true;
    };
    if (label == "desed_mix" || label == "desed_bg") {
      if (roles.desed_background) add(*roles.desed_background);
      if (label == "desed_mix") {
        for (const auto& e : roles.foreground) add(e.audio);
      }
    } else if (label == "desed_fg_mix") {
      for (const auto& e : roles.foreground) add(e.audio);
    } else if (label == "desed_fg") {
      individual_fg = true;
      if (next_fg < roles.foreground.size()) add(roles.foreground[next_fg++].audio);
    } else if (label.rfind("desed_fg_", 0) == 0) {
      const std::string cls = label.substr(9);
      for (const auto& e : roles.foreground) {
        if (e.event.label == cls) add(e.audio);
      }
    } else if (label == "fuss_mix") {
      for (const auto& w : roles.fuss) add(w);
    } else if (label == "fuss_src") {
      individual_fuss = true;
      if (next_fuss < roles.fuss.size()) add(roles.fuss[next_fuss++]);
    } else {
      raise(errc::kBadScheme, scheme.name + ": unknown slot label '" + label + "'");
    }
    out.active[i] = contributed && energy(acc) > 0.0;
    if (out.active[i]) out.slots[i] = Waveform(std::move(acc), sr);
  }

  if (individual_fg && next_fg < roles.foreground.size()) {
    raise(errc::kTooManyEvents, std::to_string(roles.foreground.size()) +
                                    " foreground events exceed the foreground slots of " +
                                    scheme.name);
  }
  if (individual_fuss && next_fuss < roles.fuss.size()) {
    raise(errc::kTooManyEvents, std::to_string(roles.fuss.size()) +
                                    " FUSS sources exceed the FUSS slots of " + scheme.name);
  }
  const bool classwise = std::any_of(scheme.slots.begin(), scheme.slots.end(), [](const auto& s) {
    return s.label.rfind("desed_fg_", 0) == 0 && s.label != "desed_fg_mix";
  });
  if (classwise) {
    for (const auto& e : roles.foreground) {
      if (std::find(out.labels.begin(), out.labels.end(), "desed_fg_" + e.event.label) ==
          out.labels.end()) {
        raise(errc::kBadScheme, scheme.name + " has no slot for class " + e.event.label);
      }
    }
  }
  return out;
}

GeneratedClip generate_clip(const MixSpec& spec, const TaskScheme& scheme, const SourceBank& bank,
                            std::size_t index) {
  const ClipRoles roles = draw_roles(spec, scheme, bank, index);
  GeneratedClip clip;
  clip.clip_id = clip_name(spec.seed, index);
  clip.refs = build_task_targets(roles, scheme);
  clip.mixture = clip.refs.sum();
  clip.truth.clip_id = clip.clip_id;
  clip.truth.clip_duration = static_cast<double>(roles.length) / roles.sample_rate;
  for (const auto& e : roles.foreground) clip.truth.events.push_back(e.event);
  std::stable_sort(clip.truth.events.begin(), clip.truth.events.end(),
                   [](const Event& a, const Event& b) { return a.onset < b.onset; });
  return clip;
}

std::string manifest_to_json(const DatasetManifest& m) {
  nlohmann::ordered_json j;
  j["scheme"] = m.scheme;
  j["seed"] = m.seed;
  j["sample_rate"] = m.sample_rate;
  j["clip_duration"] = m.clip_duration;
  j["clips"] = nlohmann::ordered_json::array();
  for (const auto& c : m.clips) {
    nlohmann::ordered_json cj;
    cj["clip_id"] = c.clip_id;
    cj["mixture"] = c.mixture;
    cj["slots"] = c.slots;
    cj["active"] = c.active;
    cj["labels"] = c.labels;
    j["clips"].push_back(std::move(cj));
  }
  return j.dump(2) + "\n";
}

DatasetManifest manifest_from_json(const std::string& text) {
  DatasetManifest m;
  try {
    const auto j = nlohmann::json::parse(text);
    m.scheme = j.at("scheme").get<std::string>();
    m.seed = j.value("seed", std::uint64_t{0});
    m.sample_rate = j.value("sample_rate", kCanonicalSampleRate);
    m.clip_duration = j.value("clip_duration", 10.0);
    for (const auto& cj : j.at("clips")) {
      DatasetManifest::Clip c;
      c.clip_id = cj.at("clip_id").get<std::string>();
      c.mixture = cj.at("mixture").get<std::string>();
      c.slots = cj.at("slots").get<std::vector<std::string>>();
      c.active = cj.contains("active") ? cj["active"].get<std::vector<bool>>()
                                       : std::vector<bool>(c.slots.size(), false);
      if (!cj.contains("active")) {
        for (std::size_t i = 0; i < c.slots.size(); ++i) c.active[i] = c.slots[i] != "zero";
      }
      c.labels = cj.contains("labels") ? cj["labels"].get<std::vector<std::string>>()
                                       : std::vector<std::string>(c.slots.size());
      if (c.active.size() != c.slots.size() || c.labels.size() != c.slots.size()) {
        raise(errc::kMalformedManifest, c.clip_id + ": slot metadata lengths differ");
      }
      m.clips.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    raise(errc::kMalformedManifest, std::string("invalid dataset manifest: ") + e.what());
  }
  return m;
}

DatasetManifest export_dataset(const std::vector<GeneratedClip>& clips, const TaskScheme& scheme,
                               const MixSpec& spec, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "audio", ec);
  if (!ec) std::filesystem::create_directories(out_dir / "sources", ec);
  if (ec) raise(errc::kIoFailure, "cannot create " + out_dir.string() + ": " + ec.message());

  DatasetManifest m;
  m.scheme = scheme.name;
  m.seed = spec.seed;
  m.sample_rate = spec.sample_rate;
  m.clip_duration = spec.duration;
  EventSet truth;
  for (const auto& clip : clips) {
    DatasetManifest::Clip c;
    c.clip_id = clip.clip_id;
    c.mixture = "audio/" + clip.clip_id + ".wav";
    write_wav(clip.mixture, out_dir / c.mixture, SampleFormat::kFloat32);
    for (std::size_t k = 0; k < clip.refs.size(); ++k) {
      if (!clip.refs.active[k]) {
        c.slots.push_back("zero");
      } else {
        c.slots.push_back("sources/" + clip.clip_id + "_s" + std::to_string(k) + ".wav");
        write_wav(clip.refs.slots[k], out_dir / c.slots.back(), SampleFormat::kFloat32);
      }
    }
    c.active = clip.refs.active;
    c.labels = clip.refs.labels;
    m.clips.push_back(std::move(c));
    truth[clip.clip_id] = clip.truth;
  }
  write_events_tsv(truth, out_dir / "ground_truth.tsv");
  write_text_file(out_dir / "manifest.json", manifest_to_json(m));
  return m;
}

}  // namespace sedsep
