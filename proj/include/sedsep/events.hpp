#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace sedsep {

struct Event {
  double onset = 0.0;   // s
  double offset = 0.0;  // s
  std::string label;

  bool operator==(const Event&) const = default;
};

// Events of one clip; 0 <= onset < offset <= clip_duration.
struct EventList {
  std::string clip_id;
  double clip_duration = 10.0;
  std::vector<Event> events;
};

// clip_id -> events, ordered by clip id.
using EventSet = std::map<std::string, EventList>;

// DESED-style TSV: header `filename<TAB>onset<TAB>offset<TAB>event_label`, one
// row per event, times with 3 decimals, filename = clip_id + ".wav". Clips
// without events are written as a row with only the filename so the clip
// inventory survives a round trip.
std::string format_events_tsv(const EventSet& events);
void write_events_tsv(const EventSet& events, const std::filesystem::path& path);

// Throws ParseError naming the file and line.
EventSet parse_events_tsv(const std::string& text, const std::string& source_name,
                          double clip_duration = 10.0);
EventSet read_events_tsv(const std::filesystem::path& path, double clip_duration = 10.0);

// "dir/clip_1.wav" -> "clip_1".
std::string clip_id_from_filename(const std::string& filename);

}  // namespace sedsep
