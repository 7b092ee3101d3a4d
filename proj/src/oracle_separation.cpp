#include "sedsep/oracle_separation.hpp"

#include <cmath>
#include <iostream>
#include <map>
#include "json.hpp"

#include "sedsep/error.hpp"

namespace sedsep {

namespace {

enum class MaskKind { kRatio, kBinary };

void check_references(const SourceSet& refs, const Waveform& mixture) {
  refs.validate();
  for (const auto& s : refs.slots) assert_compatible(s, mixture);
  const double mix_power = energy(mixture.samples());
  if (mix_power <= 0.0) return;
  const auto total = refs.sum();
  double err = 0.0;
  for (std::size_t i = 0; i < mixture.size(); ++i) {
    const double d = total[i] - mixture[i];
    err += d * d;
  }
  if (err > 1e-3 * mix_power) {
    std::cerr << "warning: reference sources differ from the mixture by "
              << 10.0 * std::log10(err / mix_power) << " dB relative power\n";
  }
}

SourceSet oracle_separate(const SourceSet& refs, const Waveform& mixture, const StftConfig& cfg,
                          MaskKind kind) {
  check_references(refs, mixture);
  const std::size_t m = refs.size();
  SourceSet out = SourceSet::zeros(m, mixture.size(), mixture.sample_rate());
  out.active = refs.active;
  out.labels = refs.labels;
  out.groups = refs.groups;

  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < m; ++i) {
    if (refs.active[i]) live.push_back(i);
  }
  if (live.empty() || mixture.empty()) return out;

  const StftGrid mix_spec = stft(mixture, cfg);
  std::vector<StftGrid> ref_specs;
  ref_specs.reserve(live.size());
  for (std::size_t i : live) ref_specs.push_back(stft(refs.slots[i], cfg));

  const std::size_t n = live.size();
  MaskGrid masks(n, mix_spec.frames, mix_spec.bins);
  std::vector<double> mags(n);
  for (std::size_t t = 0; t < mix_spec.frames; ++t) {
    for (std::size_t f = 0; f < mix_spec.bins; ++f) {
      double total = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        mags[j] = std::abs(ref_specs[j].at(t, f));
        total += mags[j];
      }
      if (total <= 0.0) {
        for (std::size_t j = 0; j < n; ++j) masks.at(j, t, f) = 1.0 / static_cast<double>(n);
        continue;
      }
      if (kind == MaskKind::kRatio) {
        for (std::size_t j = 0; j < n; ++j) masks.at(j, t, f) = mags[j] / (total + kIrmEpsilon);
      } else {
        std::size_t best = 0;
        for (std::size_t j = 1; j < n; ++j) {
          if (mags[j] > mags[best]) best = j;
        }
        masks.at(best, t, f) = 1.0;
      }
    }
  }

  const auto estimates = apply_masks(mix_spec, masks, mixture.size());
  const auto projected = mixture_consistency(estimates, mixture);
  for (std::size_t j = 0; j < n; ++j) out.slots[live[j]] = projected[j];
  return out;
}

}  // namespace

SourceSet oracle_irm(const SourceSet& references, const Waveform& mixture,
                     const StftConfig& cfg) {
  return oracle_separate(references, mixture, cfg, MaskKind::kRatio);
}

SourceSet oracle_ibm(const SourceSet& references, const Waveform& mixture,
                     const StftConfig& cfg) {
  return oracle_separate(references, mixture, cfg, MaskKind::kBinary);
}

SourceSet remap_slots(const SourceSet& s, const TaskScheme& scheme) {
  if (s.size() != scheme.size()) {
    raise(errc::kShapeMismatch, "source set has " + std::to_string(s.size()) + " slots but " +
                                    scheme.name + " declares " + std::to_string(scheme.size()));
  }
  std::map<std::string, std::size_t> out_index;
  for (std::size_t g = 0; g < scheme.group_order.size(); ++g) {
    out_index.emplace(scheme.group_order[g], g);
  }
  SourceSet out = SourceSet::zeros(scheme.group_order.size(), s.length(), s.sample_rate());
  std::vector<std::vector<double>> acc(out.size(), std::vector<double>(s.length(), 0.0));
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto it = out_index.find(scheme.slots[i].group);
    if (it == out_index.end()) {
      raise(errc::kUnknownGroup, "slot " + std::to_string(i) + " has group '" +
                                     scheme.slots[i].group + "' not declared by " + scheme.name);
    }
    const std::size_t g = it->second;
    const auto x = s.slots[i].samples();
    for (std::size_t k = 0; k < x.size(); ++k) acc[g][k] += x[k];
    if (s.active[i]) out.active[g] = true;
  }
  for (std::size_t g = 0; g < out.size(); ++g) {
    out.labels[g] = scheme.group_order[g];
    out.groups[g] = scheme.group_order[g];
    out.slots[g] = Waveform(std::move(acc[g]), s.sample_rate());
  }
  return out;
}

SourceManifest parse_source_manifest(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    raise(errc::kMalformedManifest, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("clip_id") || !j.contains("mixture") ||
      !j.contains("slots") || !j["clip_id"].is_string() || !j["mixture"].is_string() ||
      !j["slots"].is_array()) {
    raise(errc::kMalformedManifest,
          "manifest must be an object with string 'clip_id', string 'mixture' and array 'slots'");
  }
  SourceManifest m;
  m.clip_id = j["clip_id"].get<std::string>();
  m.mixture = j["mixture"].get<std::string>();
  for (const auto& s : j["slots"]) {
    if (!s.is_string()) raise(errc::kMalformedManifest, "slot entries must be strings");
    m.slots.push_back(s.get<std::string>());
  }
  if (m.slots.empty()) raise(errc::kMalformedManifest, "manifest declares no slots");
  return m;
}

ExternalSources load_external_sources(const std::filesystem::path& dir,
                                      const SourceManifest& manifest) {
  auto resolve = [&](const std::filesystem::path& p) {
    const auto full = p.is_absolute() ? p : dir / p;
    if (!std::filesystem::exists(full)) raise(errc::kMissingFile, "missing file " + full.string());
    return full;
  };
  ExternalSources out;
  out.clip_id = manifest.clip_id;
  out.mixture = read_wav(resolve(manifest.mixture));
  const std::size_t m = manifest.slots.size();
  out.sources = SourceSet::zeros(m, out.mixture.size(), out.mixture.sample_rate());
  for (std::size_t i = 0; i < m; ++i) {
    if (manifest.slots[i] == "zero") continue;
    Waveform w = read_wav(resolve(manifest.slots[i]));
    if (w.sample_rate() != out.mixture.sample_rate()) assert_compatible(w, out.mixture);
    if (w.size() != out.mixture.size()) {
      raise(errc::kLengthMismatch, manifest.clip_id + " slot " + std::to_string(i) + " has " +
                                       std::to_string(w.size()) + " samples, mixture has " +
                                       std::to_string(out.mixture.size()));
    }
    out.sources.slots[i] = std::move(w);
    out.sources.active[i] = true;
  }
  return out;
}

}  // namespace sedsep
