#include "alarmtop/alarm_log.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "alarmtop/error.hpp"

namespace alarmtop {

namespace {

constexpr std::string_view kHeader = "timestamp,tag,msg_type,case_id";

bool read_digits(std::string_view s, std::size_t pos, std::size_t count, int& out) {
  if (pos + count > s.size()) return false;
  int v = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::optional<MsgType> parse_msg_type(std::string_view s) {
  if (s == "ALM") return MsgType::Alm;
  if (s == "RTN") return MsgType::Rtn;
  if (s == "ACK") return MsgType::Ack;
  return std::nullopt;
}

std::string format_seconds(Duration d) {
  const auto ms = d.count();
  if (ms % 1000 == 0) return std::to_string(ms / 1000);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", static_cast<double>(ms) / 1000.0);
  std::string s(buf);
  while (s.back() == '0') s.pop_back();
  return s;
}

// FNV-1a; stable across platforms, unlike std::hash.
std::uint32_t fnv1a(std::string_view s) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : s) {
    h ^= c;
    h *= 16777619u;
  }
  return h;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void require_timestamps(const Dataset& ds) {
  for (const auto& tr : ds.traces)
    if (!tr.timestamps) throw MissingTimestamps(tr.case_id);
}

}  // namespace

std::string_view to_string(MsgType type) {
  switch (type) {
    case MsgType::Alm: return "ALM";
    case MsgType::Rtn: return "RTN";
    case MsgType::Ack: return "ACK";
  }
  return "?";
}

AlarmLog::AlarmLog(std::vector<AlarmEvent> events) : events_(std::move(events)) {
  std::stable_sort(events_.begin(), events_.end(), [](const auto& a, const auto& b) {
    if (a.case_id != b.case_id) return a.case_id < b.case_id;
    return a.timestamp < b.timestamp;
  });
  for (const auto& e : events_) tags_.insert(e.tag);
}

std::set<std::string> Dataset::activity_universe() const {
  std::set<std::string> out;
  for (const auto& tr : traces) out.insert(tr.activities.begin(), tr.activities.end());
  return out;
}

std::size_t Dataset::event_count() const {
  std::size_t n = 0;
  for (const auto& tr : traces) n += tr.size();
  return n;
}

std::optional<TimePoint> parse_timestamp(std::string_view s) {
  using namespace std::chrono;
  int y, mo, d, h, mi, sec;
  if (!read_digits(s, 0, 4, y) || s.size() < 19 || s[4] != '-' ||
      !read_digits(s, 5, 2, mo) || s[7] != '-' || !read_digits(s, 8, 2, d) ||
      s[10] != 'T' || !read_digits(s, 11, 2, h) || s[13] != ':' ||
      !read_digits(s, 14, 2, mi) || s[16] != ':' || !read_digits(s, 17, 2, sec))
    return std::nullopt;
  if (h > 23 || mi > 59 || sec > 59) return std::nullopt;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;

  std::size_t pos = 19;
  int millis = 0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    std::size_t digits = 0;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      if (digits < 3) millis = millis * 10 + (s[pos] - '0');
      ++digits;
      ++pos;
    }
    if (digits == 0) return std::nullopt;
    for (std::size_t i = digits; i < 3; ++i) millis *= 10;
  }

  int offset_minutes = 0;
  if (pos >= s.size()) return std::nullopt;  // zone is mandatory
  if (s[pos] == 'Z') {
    ++pos;
  } else if (s[pos] == '+' || s[pos] == '-') {
    const int sign = s[pos] == '-' ? -1 : 1;
    int oh, om;
    if (!read_digits(s, pos + 1, 2, oh)) return std::nullopt;
    std::size_t next = pos + 3;
    if (next < s.size() && s[next] == ':') ++next;
    if (!read_digits(s, next, 2, om)) return std::nullopt;
    if (oh > 23 || om > 59) return std::nullopt;
    offset_minutes = sign * (oh * 60 + om);
    pos = next + 2;
  } else {
    return std::nullopt;
  }
  if (pos != s.size()) return std::nullopt;

  const auto tp = sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec} +
                  milliseconds{millis} - minutes{offset_minutes};
  return time_point_cast<Duration>(tp);
}

std::string format_timestamp(TimePoint tp) {
  using namespace std::chrono;
  const auto day_start = floor<days>(tp);
  const year_month_day ymd{day_start};
  auto rest = tp - day_start;
  const auto h = duration_cast<hours>(rest);
  rest -= h;
  const auto mi = duration_cast<minutes>(rest);
  rest -= mi;
  const auto sec = duration_cast<seconds>(rest);
  rest -= sec;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<int>(h.count()),
                static_cast<int>(mi.count()), static_cast<int>(sec.count()),
                static_cast<int>(rest.count()));
  return buf;
}

AlarmLog parse_alarm_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<AlarmEvent> events;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (line.empty()) continue;
    if (!have_header) {
      if (line != kHeader)
        throw MalformedRow(line_no, "expected header '" + std::string(kHeader) + "'");
      have_header = true;
      continue;
    }
    if (line.find('"') != std::string::npos)
      throw MalformedRow(line_no, "quoted fields are not supported");
    const auto fields = split_commas(line);
    if (fields.size() != 4)
      throw MalformedRow(line_no, "expected 4 columns, found " + std::to_string(fields.size()));

    AlarmEvent ev;
    const auto ts = parse_timestamp(fields[0]);
    if (!ts) throw MalformedRow(line_no, "unparseable timestamp '" + std::string(fields[0]) + "'");
    ev.timestamp = *ts;
    if (fields[1].empty()) throw MalformedRow(line_no, "empty tag");
    ev.tag = fields[1];
    const auto type = parse_msg_type(fields[2]);
    if (!type) throw UnknownMsgType(line_no, std::string(fields[2]));
    ev.msg_type = *type;
    if (fields[3].empty()) throw MalformedRow(line_no, "empty case_id");
    ev.case_id = fields[3];
    events.push_back(std::move(ev));
  }
  if (events.empty()) throw EmptyLog();
  return AlarmLog(std::move(events));
}

AlarmLog parse_alarm_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_alarm_csv(in);
}

void write_alarm_csv(const AlarmLog& log, std::ostream& out) {
  out << kHeader << '\n';
  for (const auto& e : log.events())
    out << format_timestamp(e.timestamp) << ',' << e.tag << ',' << to_string(e.msg_type)
        << ',' << e.case_id << '\n';
}

DatasetBuild build_dataset(const AlarmLog& log, std::string fault_label) {
  if (log.empty()) throw EmptyLog();
  DatasetBuild result;
  result.dataset.fault_label = std::move(fault_label);

  // events are grouped by case already
  const auto& events = log.events();
  std::size_t i = 0;
  while (i < events.size()) {
    Trace tr;
    tr.case_id = events[i].case_id;
    tr.timestamps.emplace();
    for (; i < events.size() && events[i].case_id == tr.case_id; ++i) {
      if (events[i].msg_type != MsgType::Alm) continue;
      tr.activities.push_back(events[i].tag);
      tr.timestamps->push_back(events[i].timestamp);
    }
    if (tr.empty())
      result.cases_without_alarms.push_back(tr.case_id);
    else
      result.dataset.traces.push_back(std::move(tr));
  }
  return result;
}

AlarmLog dataset_to_log(const Dataset& ds) {
  require_timestamps(ds);
  std::vector<AlarmEvent> events;
  for (const auto& tr : ds.traces)
    for (std::size_t k = 0; k < tr.size(); ++k)
      events.push_back({(*tr.timestamps)[k], tr.activities[k], MsgType::Alm, tr.case_id});
  return AlarmLog(std::move(events));
}

void export_dotted_chart(const Dataset& ds, std::ostream& out, ChartFormat format) {
  require_timestamps(ds);

  if (format == ChartFormat::Csv) {
    out << "case,seconds,tag\n";
    for (std::size_t c = 0; c < ds.traces.size(); ++c) {
      const auto& tr = ds.traces[c];
      if (tr.empty()) continue;
      const auto start = tr.timestamps->front();
      for (std::size_t k = 0; k < tr.size(); ++k)
        out << c << ',' << format_seconds((*tr.timestamps)[k] - start) << ','
            << tr.activities[k] << '\n';
    }
    return;
  }

  constexpr double kLeft = 90, kRight = 20, kTop = 20, kRow = 12, kPlotWidth = 800;
  Duration span{0};
  for (const auto& tr : ds.traces)
    if (!tr.empty()) span = std::max(span, tr.timestamps->back() - tr.timestamps->front());
  const double span_s = std::max(1.0, static_cast<double>(span.count()) / 1000.0);
  const double height = kTop * 2 + kRow * static_cast<double>(ds.traces.size()) + 20;

  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\">\n",
                kLeft + kPlotWidth + kRight, height);
  out << buf;
  out << "<title>" << xml_escape(ds.fault_label) << "</title>\n";
  for (std::size_t c = 0; c < ds.traces.size(); ++c) {
    const auto& tr = ds.traces[c];
    const double y = kTop + kRow * (static_cast<double>(c) + 0.5);
    out << "<g class=\"case\" data-case=\"" << xml_escape(tr.case_id) << "\">\n";
    std::snprintf(buf, sizeof buf, "<text x=\"4\" y=\"%.1f\" font-size=\"9\">", y + 3);
    out << buf << xml_escape(tr.case_id) << "</text>\n";
    if (!tr.empty()) {
      const auto start = tr.timestamps->front();
      for (std::size_t k = 0; k < tr.size(); ++k) {
        const double t = static_cast<double>(((*tr.timestamps)[k] - start).count()) / 1000.0;
        const double x = kLeft + kPlotWidth * t / span_s;
        const unsigned hue = fnv1a(tr.activities[k]) % 360;
        std::snprintf(buf, sizeof buf,
                      "<circle cx=\"%.2f\" cy=\"%.1f\" r=\"3\" fill=\"hsl(%u,70%%,45%%)\">",
                      x, y, hue);
        out << buf << "<title>" << xml_escape(tr.activities[k]) << "</title></circle>\n";
      }
    }
    out << "</g>\n";
  }
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.0f\" y=\"%.0f\" font-size=\"10\">time since case start (0 - %g s)</text>\n",
                kLeft, height - 8, span_s);
  out << buf << "</svg>\n";
}

}  // namespace alarmtop
