#include "phagraph/events.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace phagraph {

EventFormat parse_event_format(const std::string& name) {
  if (name == "csv") return EventFormat::Csv;
  if (name == "jsonl") return EventFormat::Jsonl;
  throw ValidationError("unknown event format '" + name + "' (expected csv or jsonl)");
}

namespace {

bool parse_timestamp(std::string_view text, std::int64_t& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && out >= 0;
}

// Returns empty string on success, reason otherwise.
std::string parse_csv_line(const std::string& line, InstallEvent& ev) {
  const auto c1 = line.find(',');
  if (c1 == std::string::npos) return "expected 3 comma-separated fields";
  const auto c2 = line.find(',', c1 + 1);
  if (c2 == std::string::npos) return "expected 3 comma-separated fields";
  if (line.find(',', c2 + 1) != std::string::npos) return "expected 3 comma-separated fields";
  ev.device_id = line.substr(0, c1);
  ev.app_id = line.substr(c1 + 1, c2 - c1 - 1);
  if (ev.device_id.empty()) return "empty device_id";
  if (ev.app_id.empty()) return "empty app_id";
  if (!parse_timestamp(std::string_view(line).substr(c2 + 1), ev.timestamp))
    return "timestamp is not a nonnegative integer";
  return {};
}

std::string parse_jsonl_line(const std::string& line, InstallEvent& ev) {
  nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return "not a JSON object";
  if (!doc.contains("device_id") || !doc["device_id"].is_string()) return "missing string key device_id";
  if (!doc.contains("app_id") || !doc["app_id"].is_string()) return "missing string key app_id";
  if (!doc.contains("ts") || !doc["ts"].is_number_integer()) return "missing integer key ts";
  ev.device_id = doc["device_id"].get<std::string>();
  ev.app_id = doc["app_id"].get<std::string>();
  ev.timestamp = doc["ts"].get<std::int64_t>();
  if (ev.device_id.empty()) return "empty device_id";
  if (ev.app_id.empty()) return "empty app_id";
  if (ev.timestamp < 0) return "negative ts";
  return {};
}

}  // namespace

IngestResult ingest_events(std::istream& source, const IngestOptions& opts) {
  IngestResult result;
  std::string line;
  std::size_t line_no = 0;
  bool header_pending = opts.skip_header && opts.format == EventFormat::Csv;
  while (std::getline(source, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (header_pending) {
      header_pending = false;
      continue;
    }
    if (line.empty()) continue;
    InstallEvent ev;
    std::string reason = opts.format == EventFormat::Csv ? parse_csv_line(line, ev)
                                                         : parse_jsonl_line(line, ev);
    if (reason.empty()) {
      result.events.push_back(std::move(ev));
    } else {
      if (result.malformed_lines == 0) {
        result.first_malformed_line = line_no;
        result.first_malformed_reason = reason;
      }
      ++result.malformed_lines;
    }
  }
  if (source.bad()) throw IoError("I/O failure while reading event stream");
  if (opts.strict && result.malformed_lines > 0) {
    throw ParseError("malformed event at line " + std::to_string(result.first_malformed_line) +
                     ": " + result.first_malformed_reason);
  }
  return result;
}

IngestResult ingest_events_file(const std::string& path, const IngestOptions& opts) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open event file: " + path);
  return ingest_events(in, opts);
}

void write_events(std::ostream& out, const std::vector<InstallEvent>& events, EventFormat format) {
  if (format == EventFormat::Csv) {
    for (const auto& ev : events) {
      out << ev.device_id << ',' << ev.app_id << ',' << ev.timestamp << '\n';
    }
  } else {
    for (const auto& ev : events) {
      nlohmann::json doc{{"device_id", ev.device_id}, {"app_id", ev.app_id}, {"ts", ev.timestamp}};
      out << doc.dump() << '\n';
    }
  }
  if (!out) throw IoError("I/O failure while writing events");
}

void write_events_file(const std::string& path, const std::vector<InstallEvent>& events,
                       EventFormat format) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open output file: " + path);
  write_events(out, events, format);
}

}  // namespace phagraph
