#include "sedsep/events.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "sedsep/error.hpp"
#include "sedsep/text_io.hpp"

namespace sedsep {

std::string clip_id_from_filename(const std::string& filename) {
  return std::filesystem::path(filename).stem().string();
}

std::string format_events_tsv(const EventSet& events) {
  std::string out = "filename\tonset\toffset\tevent_label\n";
  char buf[64];
  for (const auto& [id, list] : events) {
    if (list.events.empty()) {
      out += id + ".wav\t\t\t\n";
      continue;
    }
    for (const auto& e : list.events) {
      std::snprintf(buf, sizeof(buf), "\t%.3f\t%.3f\t", e.onset, e.offset);
      out += id + ".wav" + buf + e.label + "\n";
    }
  }
  return out;
}

void write_events_tsv(const EventSet& events, const std::filesystem::path& path) {
  write_text_file(path, format_events_tsv(events));
}

EventSet parse_events_tsv(const std::string& text, const std::string& source_name,
                          double clip_duration) {
  EventSet out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, '\t');
    if (!header_seen) {
      header_seen = true;
      if (fields.size() >= 4 && fields[0] == "filename" && fields[1] == "onset") continue;
      raise(errc::kParseError, source_name + ":" + std::to_string(line_no) +
                                   ": expected header 'filename\tonset\toffset\tevent_label'");
    }
    const auto fail = [&](const std::string& what) {
      raise(errc::kParseError, source_name + ":" + std::to_string(line_no) + ": " + what);
    };
    if (fields.empty() || fields[0].empty()) fail("missing filename");
    const std::string id = clip_id_from_filename(fields[0]);
    auto [it, inserted] = out.try_emplace(id);
    if (inserted) {
      it->second.clip_id = id;
      it->second.clip_duration = clip_duration;
    }
    const bool empty_row =
        fields.size() == 1 || (fields.size() == 4 && fields[1].empty() && fields[2].empty() &&
                               fields[3].empty());
    if (empty_row) continue;
    if (fields.size() != 4) fail("expected 4 tab-separated fields, got " + std::to_string(fields.size()));
    Event e;
    const auto onset = parse_double(fields[1]);
    const auto offset = parse_double(fields[2]);
    if (!onset || !offset) fail("onset/offset must be numbers");
    e.onset = *onset;
    e.offset = *offset;
    e.label = fields[3];
    if (e.label.empty()) fail("empty event label");
    if (!(e.onset >= 0.0) || !(e.offset > e.onset)) fail("require 0 <= onset < offset");
    it->second.events.push_back(std::move(e));
  }
  if (!header_seen) raise(errc::kParseError, source_name + ": empty file");
  return out;
}

EventSet read_events_tsv(const std::filesystem::path& path, double clip_duration) {
  return parse_events_tsv(read_text_file(path), path.string(), clip_duration);
}

}  // namespace sedsep
