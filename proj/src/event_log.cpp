#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include "robusched/simengine.hpp"

namespace robusched {

namespace {

constexpr std::array<EventKind, 9> kAllKinds{
    EventKind::arrival,          EventKind::mapped,    EventKind::deferred,
    EventKind::started,          EventKind::completed_ontime, EventKind::completed_late,
    EventKind::dropped_deadline, EventKind::evicted,   EventKind::dropped_pruned};

}  // namespace

const char* to_token(EventKind k) {
  switch (k) {
    case EventKind::arrival: return "arrival";
    case EventKind::mapped: return "mapped";
    case EventKind::deferred: return "deferred";
    case EventKind::started: return "started";
    case EventKind::completed_ontime: return "completed_ontime";
    case EventKind::completed_late: return "completed_late";
    case EventKind::dropped_deadline: return "dropped_deadline";
    case EventKind::evicted: return "evicted";
    case EventKind::dropped_pruned: return "dropped_pruned";
  }
  return "?";
}

EventKind parse_event_kind(const std::string& token) {
  for (EventKind k : kAllKinds)
    if (token == to_token(k)) return k;
  throw ParseError("unknown event kind '" + token + "'");
}

std::string serialize_event_log(const EventLog& log) {
  std::ostringstream os;
  os << "robusched-events 1\n";
  os << "time,kind,task,machine,detail\n";
  for (const auto& e : log)
    os << e.time << ',' << to_token(e.kind) << ',' << e.task << ',' << e.machine << ','
       << e.detail << '\n';
  return os.str();
}

EventLog parse_event_log(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  EventLog log;
  const auto fail = [&](const std::string& what) {
    return ParseError("event log line " + std::to_string(line_no) + ": " + what);
  };
  const auto as_int = [&](std::string_view s, auto& out) {
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw fail("malformed integer '" + std::string(s) + "'");
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (line != "robusched-events 1") throw fail("expected 'robusched-events 1' header");
      continue;
    }
    if (line_no == 2) {
      if (line != "time,kind,task,machine,detail") throw fail("unexpected column row");
      continue;
    }
    if (line.empty()) continue;
    std::array<std::string_view, 5> f;
    std::string_view rest(line);
    for (std::size_t c = 0; c < 5; ++c) {
      const auto comma = rest.find(',');
      if ((comma == std::string_view::npos) != (c == 4)) throw fail("expected 5 fields");
      f[c] = rest.substr(0, comma);
      if (c < 4) rest.remove_prefix(comma + 1);
    }
    Event e;
    as_int(f[0], e.time);
    e.kind = parse_event_kind(std::string(f[1]));
    as_int(f[2], e.task);
    as_int(f[3], e.machine);
    as_int(f[4], e.detail);
    log.push_back(e);
  }
  return log;
}

void save_event_log(const EventLog& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << serialize_event_log(log);
}

EventLog load_event_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_event_log(ss.str());
}

}  // namespace robusched
