#include "sedsep/ss_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sedsep/error.hpp"

namespace sedsep {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double diff_energy(std::span<const double> a, std::span<const double> b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    e += d * d;
  }
  return e;
}

}  // namespace

void SnrConfig::validate() const {
  if (!(snr_max_active > 0.0) || !(snr_max_inactive > 0.0) || !(si_snr_cap > 0.0)) {
    raise(errc::kBadConfig, "SNR thresholds must be positive");
  }
  if (!(epsilon > 0.0)) raise(errc::kBadConfig, "epsilon must be positive");
}

double SnrConfig::tau_active() const { return std::pow(10.0, -snr_max_active / 10.0); }
double SnrConfig::tau_inactive() const { return std::pow(10.0, -snr_max_inactive / 10.0); }

double si_snr(const Waveform& est, const Waveform& ref, const SnrConfig& cfg) {
  assert_compatible(est, ref);
  const auto r = ref.samples();
  const auto e = est.samples();
  const double ref_energy = energy(r);
  if (ref_energy <= 0.0) raise(errc::kZeroReference, "SI-SNR reference is all-zero");

  const double scale = dot(e, r) / ref_energy;
  double target = 0.0;
  double noise = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double t = scale * r[i];
    const double n = e[i] - t;
    target += t * t;
    noise += n * n;
  }
  // An estimate orthogonal to the reference (including silence) has no
  // target component at all.
  if (target <= 0.0) return -cfg.si_snr_cap;
  const double value = 10.0 * std::log10(target / (noise + cfg.epsilon * target));
  return std::clamp(value, -cfg.si_snr_cap, cfg.si_snr_cap);
}

double si_snr_improvement(const Waveform& est, const Waveform& ref, const Waveform& mixture,
                          const SnrConfig& cfg) {
  return si_snr(est, ref, cfg) - si_snr(mixture, ref, cfg);
}

double stabilized_snr_loss_active(const Waveform& est, const Waveform& ref,
                                  const SnrConfig& cfg) {
  assert_compatible(est, ref);
  const double ref_energy = energy(ref.samples());
  if (ref_energy <= 0.0) {
    raise(errc::kZeroReference, "active loss needs a non-zero reference; use the inactive loss");
  }
  const double err = diff_energy(ref.samples(), est.samples());
  return -10.0 * std::log10(ref_energy / (err + cfg.tau_active() * ref_energy));
}

double stabilized_snr_loss_inactive(const Waveform& est, const Waveform& mixture,
                                    const SnrConfig& cfg) {
  assert_compatible(est, mixture);
  const double mix_energy = energy(mixture.samples());
  if (mix_energy <= 0.0) raise(errc::kZeroMixture, "inactive loss needs a non-zero mixture");
  const double est_energy = energy(est.samples());
  return 10.0 * std::log10((est_energy + cfg.tau_inactive() * mix_energy) / mix_energy);
}

double pair_loss(const Waveform& est, const Waveform& ref, bool ref_active,
                 const Waveform& mixture, const SnrConfig& cfg) {
  if (ref_active && energy(ref.samples()) > 0.0) return stabilized_snr_loss_active(est, ref, cfg);
  return stabilized_snr_loss_inactive(est, mixture, cfg);
}

PitAssignment pit_assign(const std::vector<std::vector<double>>& loss,
                         const std::vector<std::vector<std::size_t>>& groups) {
  const std::size_t m = loss.size();
  PitAssignment out;
  out.assignment.resize(m);
  std::iota(out.assignment.begin(), out.assignment.end(), std::size_t{0});

  for (const auto& group : groups) {
    if (group.size() > kMaxPermutationGroup) {
      raise(errc::kGroupSizeOverflow, "permutation group of size " + std::to_string(group.size()) +
                                          " exceeds the exhaustive-search limit of " +
                                          std::to_string(kMaxPermutationGroup));
    }
    if (group.size() <= 1) continue;
    // perm[k] indexes into `group`: reference group[k] <- estimate group[perm[k]].
    std::vector<std::size_t> perm(group.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::vector<std::size_t> best = perm;
    double best_loss = std::numeric_limits<double>::infinity();
    do {
      double total = 0.0;
      for (std::size_t k = 0; k < group.size(); ++k) total += loss[group[k]][group[perm[k]]];
      if (total < best_loss) {
        best_loss = total;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    for (std::size_t k = 0; k < group.size(); ++k) out.assignment[group[k]] = group[best[k]];
  }

  for (std::size_t r = 0; r < m; ++r) out.total_loss += loss[r][out.assignment[r]];
  return out;
}

PitAssignment pit_assign(const SourceSet& ests, const SourceSet& refs, const Waveform& mixture,
                         const TaskScheme& scheme, const SnrConfig& cfg) {
  const std::size_t m = refs.size();
  if (ests.size() != m || scheme.size() != m) {
    raise(errc::kShapeMismatch, "PIT needs equal slot counts (estimates " +
                                    std::to_string(ests.size()) + ", references " +
                                    std::to_string(m) + ", scheme " +
                                    std::to_string(scheme.size()) + ")");
  }
  const auto groups = scheme.permutation_groups();
  for (const auto& g : groups) {
    if (g.size() > kMaxPermutationGroup) {
      raise(errc::kGroupSizeOverflow,
            "permutation group of size " + std::to_string(g.size()) + " is too large");
    }
  }
  // Only pairs inside the same group are ever evaluated.
  std::vector<std::vector<double>> loss(m, std::vector<double>(m, 0.0));
  for (const auto& g : groups) {
    for (std::size_t r : g) {
      for (std::size_t e : g) {
        loss[r][e] = pair_loss(ests.slots[e], refs.slots[r], refs.active[r], mixture, cfg);
      }
    }
  }
  return pit_assign(loss, groups);
}

ClipScore score_clip(const std::string& clip_id, const SourceSet& ests, const SourceSet& refs,
                     const Waveform& mixture, const SnrConfig& cfg) {
  if (ests.size() != refs.size()) {
    raise(errc::kShapeMismatch, clip_id + ": estimate and reference slot counts differ");
  }
  ClipScore score;
  score.clip_id = clip_id;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    SlotScore s;
    s.slot = i;
    s.active = refs.active[i] && energy(refs.slots[i].samples()) > 0.0;
    if (s.active) {
      s.si_snr = si_snr(ests.slots[i], refs.slots[i], cfg);
      s.si_snri = s.si_snr - si_snr(mixture, refs.slots[i], cfg);
      ++score.active_sources;
    }
    score.slots.push_back(s);
  }
  return score;
}

SeparationScore aggregate_scores(const std::vector<ClipScore>& clips) {
  if (clips.empty()) raise(errc::kEmptyInput, "no clips to aggregate");
  SeparationScore out;
  double msi_sum = 0.0;
  std::size_t msi_count = 0;
  double one_s_sum = 0.0;
  for (const auto& clip : clips) {
    if (clip.active_sources >= 2) {
      ++out.multi_source_clips;
      for (const auto& s : clip.slots) {
        if (!s.active) continue;
        msi_sum += s.si_snri;
        ++msi_count;
      }
    } else if (clip.active_sources == 1) {
      ++out.single_source_clips;
      for (const auto& s : clip.slots) {
        if (s.active) one_s_sum += s.si_snr;
      }
    }
  }
  if (msi_count > 0) out.msi = msi_sum / static_cast<double>(msi_count);
  if (out.single_source_clips > 0) {
    out.one_s = one_s_sum / static_cast<double>(out.single_source_clips);
  }
  return out;
}

}  // namespace sedsep
