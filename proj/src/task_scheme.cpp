#include "sedsep/task_scheme.hpp"

#include <algorithm>
#include <array>
#include <map>

#include "sedsep/error.hpp"

namespace sedsep {

namespace {

constexpr std::array<std::string_view, 6> kSchemeNames = {"DmFm", "BgFgFm",  "PIT",
                                                          "Classwise", "GroupPIT", "FUSS"};

}  // namespace

const std::vector<std::string>& desed_classes() {
  static const std::vector<std::string> classes = {
      "Alarm_bell_ringing", "Blender", "Cat",     "Dishes",       "Dog",
      "Electric_shaver_toothbrush", "Frying", "Running_water", "Speech", "Vacuum_cleaner"};
  return classes;
}

std::size_t TaskScheme::capacity(std::string_view group) const {
  return static_cast<std::size_t>(
      std::count_if(slots.begin(), slots.end(), [&](const auto& s) { return s.group == group; }));
}

std::vector<std::vector<std::size_t>> TaskScheme::permutation_groups() const {
  std::vector<std::vector<std::size_t>> groups;
  std::map<std::string, std::size_t> index_of;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i].permutable) {
      groups.push_back({i});
      continue;
    }
    auto [it, inserted] = index_of.emplace(slots[i].group, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  return groups;
}

std::vector<std::string> TaskScheme::slot_groups() const {
  std::vector<std::string> out;
  for (const auto& s : slots) out.push_back(s.group);
  return out;
}

std::vector<std::string> TaskScheme::slot_labels() const {
  std::vector<std::string> out;
  for (const auto& s : slots) out.push_back(s.label);
  return out;
}

namespace schemes {

TaskScheme dmfm() {
  return {"DmFm", {{"desed_mix", "desed", false}, {"fuss_mix", "fuss", false}}, {"desed", "fuss"}};
}

TaskScheme bgfgfm() {
  return {"BgFgFm",
          {{"desed_bg", "bg", false}, {"desed_fg_mix", "fg", false}, {"fuss_mix", "fuss", false}},
          {"bg", "fg", "fuss"}};
}

TaskScheme pit() {
  TaskScheme s{"PIT", {{"desed_bg", "bg", false}}, {"bg", "fg", "fuss"}};
  for (int i = 0; i < 5; ++i) s.slots.push_back({"desed_fg", "fg", true});
  s.slots.push_back({"fuss_mix", "fuss", false});
  return s;
}

TaskScheme classwise() {
  TaskScheme s{"Classwise", {}, {"bg", "fg", "fuss"}};
  for (const auto& c : desed_classes()) s.slots.push_back({"desed_fg_" + c, "fg", false});
  s.slots.push_back({"desed_bg", "bg", false});
  s.slots.push_back({"fuss_mix", "fuss", false});
  return s;
}

TaskScheme group_pit() {
  TaskScheme s{"GroupPIT", {{"desed_bg", "bg", false}}, {"bg", "fg", "fuss"}};
  for (int i = 0; i < 5; ++i) s.slots.push_back({"desed_fg", "fg", true});
  for (int i = 0; i < 4; ++i) s.slots.push_back({"fuss_src", "fuss", true});
  return s;
}

TaskScheme fuss() {
  TaskScheme s{"FUSS", {}, {"fuss"}};
  for (int i = 0; i < 4; ++i) s.slots.push_back({"fuss_src", "fuss", true});
  return s;
}

}  // namespace schemes

std::span<const std::string_view> scheme_names() { return kSchemeNames; }

TaskScheme scheme_by_name(std::string_view name) {
  if (name == "DmFm") return schemes::dmfm();
  if (name == "BgFgFm") return schemes::bgfgfm();
  if (name == "PIT") return schemes::pit();
  if (name == "Classwise") return schemes::classwise();
  if (name == "GroupPIT") return schemes::group_pit();
  if (name == "FUSS") return schemes::fuss();
  std::string valid;
  for (auto n : kSchemeNames) {
    if (!valid.empty()) valid += ", ";
    valid += n;
  }
  raise(errc::kBadScheme, "unknown scheme '" + std::string(name) + "'; valid schemes: " + valid);
}

}  // namespace sedsep
