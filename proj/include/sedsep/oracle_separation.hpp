#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sedsep/dsp.hpp"
#include "sedsep/source_set.hpp"
#include "sedsep/task_scheme.hpp"

namespace sedsep {

inline constexpr double kIrmEpsilon = 1e-8;

// Ideal ratio mask oracle: mask_i = |S_i| / (sum_j |S_j| + eps), followed by a
// uniform mixture-consistency projection over the active slots. Inactive
// reference slots produce all-zero estimates.
SourceSet oracle_irm(const SourceSet& references, const Waveform& mixture,
                     const StftConfig& cfg = {});

// Ideal binary mask oracle. Ties go to the lowest slot index.
SourceSet oracle_ibm(const SourceSet& references, const Waveform& mixture,
                     const StftConfig& cfg = {});

// One output slot per scheme group (in scheme.group_order), holding the sum
// of its member slots. Throws UnknownGroup.
SourceSet remap_slots(const SourceSet& s, const TaskScheme& scheme);

// Per-clip separated-source manifest:
//   {"clip_id": str, "mixture": path, "slots": [path | "zero", ...]}
// Relative paths resolve against `dir`.
struct SourceManifest {
  std::string clip_id;
  std::filesystem::path mixture;
  std::vector<std::string> slots;
};

// Throws MalformedManifest.
SourceManifest parse_source_manifest(const std::string& json_text);

struct ExternalSources {
  std::string clip_id;
  Waveform mixture;
  SourceSet sources;
};

// Throws MalformedManifest, MissingFile, LengthMismatch, RateMismatch.
ExternalSources load_external_sources(const std::filesystem::path& dir,
                                      const SourceManifest& manifest);

}  // namespace sedsep
