#include "sedsep/source_set.hpp"

#include <algorithm>

#include "sedsep/error.hpp"

namespace sedsep {

std::size_t SourceSet::active_count() const {
  return static_cast<std::size_t>(std::count(active.begin(), active.end(), true));
}

Waveform SourceSet::sum() const {
  std::vector<double> acc(length(), 0.0);
  for (const auto& s : slots) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += s[i];
  }
  return Waveform(std::move(acc), sample_rate());
}

void SourceSet::validate() const {
  const std::size_t m = slots.size();
  if (active.size() != m || labels.size() != m || groups.size() != m) {
    raise(errc::kShapeMismatch, "source set metadata does not match slot count");
  }
  for (std::size_t i = 0; i < m; ++i) {
    assert_compatible(slots.front(), slots[i]);
    if (!active[i]) {
      const auto x = slots[i].samples();
      if (std::any_of(x.begin(), x.end(), [](double v) { return v != 0.0; })) {
        raise(errc::kBadConfig, "inactive slot " + std::to_string(i) + " is not all-zero");
      }
    }
  }
}

SourceSet SourceSet::zeros(std::size_t m, std::size_t length, int sample_rate) {
  SourceSet s;
  s.slots.assign(m, Waveform::zeros(length, sample_rate));
  s.active.assign(m, false);
  s.labels.assign(m, "");
  s.groups.assign(m, "");
  return s;
}

}  // namespace sedsep
