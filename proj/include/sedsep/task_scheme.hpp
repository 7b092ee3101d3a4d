#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sedsep {

// The ten DESED target classes.
const std::vector<std::string>& desed_classes();

struct SlotDescriptor {
  std::string label;
  std::string group;
  // Slots that share a group and are permutable form one PIT group; all
  // other slots are fixed.
  bool permutable = false;
};

// Declarative mapping from labeled sources to separation output slots.
struct TaskScheme {
  std::string name;
  std::vector<SlotDescriptor> slots;
  // Output order used when member slots are summed per group.
  std::vector<std::string> group_order;

  std::size_t size() const noexcept { return slots.size(); }
  // Number of slots whose group is `group`.
  std::size_t capacity(std::string_view group) const;
  // Slot indices of each permutation group, singletons for fixed slots,
  // ordered by their first slot index.
  std::vector<std::vector<std::size_t>> permutation_groups() const;
  std::vector<std::string> slot_groups() const;
  std::vector<std::string> slot_labels() const;
};

namespace schemes {
// DESED mix, dry FUSS mix.
TaskScheme dmfm();
// DESED bg, DESED fg mix, dry FUSS mix.
TaskScheme bgfgfm();
// DESED bg, 5 permutable DESED fg sources, dry FUSS mix.
TaskScheme pit();
// 10 DESED class slots, DESED bg, dry FUSS mix.
TaskScheme classwise();
// DESED bg, 5 permutable DESED fg sources, 4 permutable dry FUSS sources.
TaskScheme group_pit();
// Plain FUSS: 4 permutable universal-separation slots.
TaskScheme fuss();
}  // namespace schemes

std::span<const std::string_view> scheme_names();

// Throws BadScheme, listing the valid names.
TaskScheme scheme_by_name(std::string_view name);

}  // namespace sedsep
