#pragma once

#include <chrono>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace alarmtop {

using Duration = std::chrono::milliseconds;
using TimePoint = std::chrono::sys_time<Duration>;

enum class MsgType { Alm, Rtn, Ack };

std::string_view to_string(MsgType type);

/// One alarm-system message: activation, return-to-normal or acknowledgement.
struct AlarmEvent {
  TimePoint timestamp;
  std::string tag;
  MsgType msg_type = MsgType::Alm;
  std::string case_id;

  bool operator==(const AlarmEvent&) const = default;
};

/// Events ordered by (case_id, timestamp); ties keep input order.
class AlarmLog {
 public:
  explicit AlarmLog(std::vector<AlarmEvent> events);

  const std::vector<AlarmEvent>& events() const noexcept { return events_; }
  const std::set<std::string>& tag_universe() const noexcept { return tags_; }
  bool empty() const noexcept { return events_.empty(); }

  bool operator==(const AlarmLog&) const = default;

 private:
  std::vector<AlarmEvent> events_;
  std::set<std::string> tags_;
};

/// Alarm activations of one case. When present, timestamps run parallel to
/// activities and are non-decreasing.
struct Trace {
  std::string case_id;
  std::vector<std::string> activities;
  std::optional<std::vector<TimePoint>> timestamps;

  std::size_t size() const noexcept { return activities.size(); }
  bool empty() const noexcept { return activities.empty(); }
  bool operator==(const Trace&) const = default;
};

/// The cases recorded for one fault scenario; the input of every miner.
struct Dataset {
  std::vector<Trace> traces;
  std::string fault_label;

  std::set<std::string> activity_universe() const;
  std::size_t event_count() const;
  bool empty() const noexcept { return traces.empty(); }
  bool operator==(const Dataset&) const = default;
};

/// Parses `YYYY-MM-DDTHH:MM:SS[.fff]` followed by `Z` or a `+HH:MM` offset.
/// Digits past milliseconds are truncated.
std::optional<TimePoint> parse_timestamp(std::string_view text);

/// UTC, millisecond precision, e.g. `2020-01-01T00:00:00.000Z`.
std::string format_timestamp(TimePoint tp);

/// Reads the alarm CSV (`timestamp,tag,msg_type,case_id`).
/// Throws MalformedRow, UnknownMsgType or EmptyLog.
AlarmLog parse_alarm_csv(std::istream& in);
AlarmLog parse_alarm_csv(std::string_view text);

void write_alarm_csv(const AlarmLog& log, std::ostream& out);

struct DatasetBuild {
  Dataset dataset;
  /// Cases that held no ALM message and were left out.
  std::vector<std::string> cases_without_alarms;
};

/// One trace per case, built from the ALM messages in chronological order.
DatasetBuild build_dataset(const AlarmLog& log, std::string fault_label);

/// Inverse of build_dataset for timestamped datasets: every activity becomes
/// an ALM message. Throws MissingTimestamps.
AlarmLog dataset_to_log(const Dataset& ds);

enum class ChartFormat { Csv, Svg };

/// Writes the dotted chart of ds: cases on the vertical axis, time since the
/// start of each case on the horizontal axis. Throws MissingTimestamps.
void export_dotted_chart(const Dataset& ds, std::ostream& out, ChartFormat format);

}  // namespace alarmtop
