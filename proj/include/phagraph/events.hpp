#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "phagraph/common.hpp"

namespace phagraph {

// One (device, app, timestamp) detection record.
struct InstallEvent {
  std::string device_id;
  std::string app_id;
  std::int64_t timestamp = 0;

  bool operator==(const InstallEvent&) const = default;
};

enum class EventFormat { Csv, Jsonl };

EventFormat parse_event_format(const std::string& name);

struct IngestOptions {
  EventFormat format = EventFormat::Csv;
  bool skip_header = false;  // CSV only
  bool strict = false;       // any malformed line -> ParseError naming the first one
};

struct IngestResult {
  std::vector<InstallEvent> events;       // file order
  std::size_t malformed_lines = 0;
  std::size_t first_malformed_line = 0;   // 1-based, 0 if none
  std::string first_malformed_reason;
};

// Reads `device_id,app_id,timestamp` CSV lines or JSONL objects with keys
// device_id / app_id / ts. Malformed lines are counted, never silently dropped.
IngestResult ingest_events(std::istream& source, const IngestOptions& opts);
IngestResult ingest_events_file(const std::string& path, const IngestOptions& opts);

void write_events(std::ostream& out, const std::vector<InstallEvent>& events, EventFormat format);
void write_events_file(const std::string& path, const std::vector<InstallEvent>& events,
                       EventFormat format);

}  // namespace phagraph
