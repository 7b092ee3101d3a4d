#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sedsep/audio_io.hpp"
#include "sedsep/source_set.hpp"
#include "sedsep/task_scheme.hpp"

namespace sedsep {

struct SnrConfig {
  double snr_max_active = 30.0;    // dB
  double snr_max_inactive = 20.0;  // dB, relative to mixture power
  double epsilon = 1e-8;
  double si_snr_cap = 80.0;        // dB

  // Throws BadConfig.
  void validate() const;
  double tau_active() const;
  double tau_inactive() const;
};

// Scale-invariant SNR in dB, clamped to [-cap, cap]. Throws ZeroReference.
double si_snr(const Waveform& est, const Waveform& ref, const SnrConfig& cfg = {});

// si_snr(est, ref) - si_snr(mixture, ref).
double si_snr_improvement(const Waveform& est, const Waveform& ref, const Waveform& mixture,
                          const SnrConfig& cfg = {});

// Negative stabilized SNR for an active reference; >= -snr_max_active.
double stabilized_snr_loss_active(const Waveform& est, const Waveform& ref,
                                  const SnrConfig& cfg = {});

// Estimate power relative to mixture power, floored at -snr_max_inactive.
double stabilized_snr_loss_inactive(const Waveform& est, const Waveform& mixture,
                                    const SnrConfig& cfg = {});

// Loss for one (estimate, reference) pair: the active loss if the reference
// has non-zero power, the inactive loss otherwise.
double pair_loss(const Waveform& est, const Waveform& ref, bool ref_active,
                 const Waveform& mixture, const SnrConfig& cfg = {});

inline constexpr std::size_t kMaxPermutationGroup = 8;

struct PitAssignment {
  // assignment[r] = estimate slot matched to reference slot r.
  std::vector<std::size_t> assignment;
  // Sum of per-reference-slot losses under the assignment, in slot order.
  double total_loss = 0.0;
};

// Exhaustive (group-)permutation-invariant assignment over the scheme's
// permutation groups. Ties go to the lexicographically smallest permutation.
// Throws GroupSizeOverflow, ShapeMismatch.
PitAssignment pit_assign(const SourceSet& ests, const SourceSet& refs, const Waveform& mixture,
                         const TaskScheme& scheme, const SnrConfig& cfg = {});

// Same search over a precomputed loss matrix, loss[r][e] for reference r
// paired with estimate e.
PitAssignment pit_assign(const std::vector<std::vector<double>>& loss,
                         const std::vector<std::vector<std::size_t>>& groups);

struct SlotScore {
  std::size_t slot = 0;
  bool active = false;
  double si_snr = 0.0;
  double si_snri = 0.0;
};

struct ClipScore {
  std::string clip_id;
  std::size_t active_sources = 0;
  // Only active reference slots carry meaningful values.
  std::vector<SlotScore> slots;
};

// Scores estimates against references slot by slot (after any assignment
// has been applied by the caller).
ClipScore score_clip(const std::string& clip_id, const SourceSet& ests, const SourceSet& refs,
                     const Waveform& mixture, const SnrConfig& cfg = {});

struct SeparationScore {
  std::optional<double> msi;    // mean SI-SNRi over sources of >=2-source clips
  std::optional<double> one_s;  // mean SI-SNR of 1-source clips
  std::size_t multi_source_clips = 0;
  std::size_t single_source_clips = 0;
};

// Throws EmptyInput.
SeparationScore aggregate_scores(const std::vector<ClipScore>& clips);

}  // namespace sedsep
