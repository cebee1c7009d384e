#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "alarmtop/alarm_log.hpp"
#include "alarmtop/error.hpp"
#include "support.hpp"

using namespace alarmtop;
using testing_support::at_seconds;
using testing_support::timed;

namespace {

const std::string kHeader = "timestamp,tag,msg_type,case_id\n";

std::string csv(std::initializer_list<std::string> rows) {
  std::string s = kHeader;
  for (const auto& r : rows) s += r + "\n";
  return s;
}

}  // namespace

TEST(Timestamp, RoundTripsMilliseconds) {
  const auto tp = parse_timestamp("2020-03-04T05:06:07.089Z");
  ASSERT_TRUE(tp);
  EXPECT_EQ(format_timestamp(*tp), "2020-03-04T05:06:07.089Z");
}

TEST(Timestamp, AppliesZoneOffset) {
  EXPECT_EQ(parse_timestamp("2020-01-01T02:00:00+02:00"), parse_timestamp("2020-01-01T00:00:00Z"));
  EXPECT_EQ(parse_timestamp("2020-01-01T00:00:00-0130"), parse_timestamp("2020-01-01T01:30:00Z"));
}

TEST(Timestamp, RejectsMissingZoneAndGarbage) {
  EXPECT_FALSE(parse_timestamp("2020-01-01T00:00:00"));
  EXPECT_FALSE(parse_timestamp("2020-13-01T00:00:00Z"));
  EXPECT_FALSE(parse_timestamp("yesterday"));
}

TEST(ParseAlarmCsv, SingleRow) {
  const auto log = parse_alarm_csv(csv({"2020-01-01T00:00:00.000Z,TI101.HI,ALM,case1"}));
  ASSERT_EQ(log.events().size(), 1u);
  EXPECT_EQ(log.tag_universe(), std::set<std::string>{"TI101.HI"});
  EXPECT_EQ(log.events()[0].msg_type, MsgType::Alm);
  EXPECT_EQ(log.events()[0].case_id, "case1");
}

TEST(ParseAlarmCsv, SortsWithinCase) {
  const auto log = parse_alarm_csv(csv({"2020-01-01T00:00:10Z,b,ALM,case1", "2020-01-01T00:00:05Z,a,ALM,case1"}));
  ASSERT_EQ(log.events().size(), 2u);
  EXPECT_EQ(log.events()[0].tag, "a");
  EXPECT_EQ(log.events()[1].tag, "b");
}

TEST(ParseAlarmCsv, TiesKeepFileOrder) {
  const auto log = parse_alarm_csv(csv({"2020-01-01T00:00:00Z,z,ALM,c", "2020-01-01T00:00:00Z,a,ALM,c"}));
  EXPECT_EQ(log.events()[0].tag, "z");
  EXPECT_EQ(log.events()[1].tag, "a");
}

TEST(ParseAlarmCsv, UnknownMsgTypeNamesLine) {
  try {
    parse_alarm_csv(csv({"2020-01-01T00:00:00Z,a,ALM,c", "2020-01-01T00:00:01Z,a,FOO,c"}));
    FAIL() << "expected UnknownMsgType";
  } catch (const UnknownMsgType& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.value(), "FOO");
  }
}

TEST(ParseAlarmCsv, MalformedRows) {
  EXPECT_THROW(parse_alarm_csv(csv({"2020-01-01T00:00:00Z,a,ALM"})), MalformedRow);
  EXPECT_THROW(parse_alarm_csv(csv({"2020-01-01T00:00:00Z,a,ALM,c,extra"})), MalformedRow);
  EXPECT_THROW(parse_alarm_csv(csv({"not-a-time,a,ALM,c"})), MalformedRow);
  EXPECT_THROW(parse_alarm_csv(csv({"2020-01-01T00:00:00Z,\"a,b\",ALM,c"})), MalformedRow);
  EXPECT_THROW(parse_alarm_csv(csv({"2020-01-01T00:00:00Z,,ALM,c"})), MalformedRow);
  try {
    parse_alarm_csv(csv({"2020-01-01T00:00:00Z,a,ALM,c", "bad"}));
  } catch (const MalformedRow& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(ParseAlarmCsv, EmptyLog) {
  EXPECT_THROW(parse_alarm_csv(kHeader), EmptyLog);
  EXPECT_THROW(parse_alarm_csv(std::string_view{}), Error);
}

TEST(ParseAlarmCsv, RoundTrip) {
  std::mt19937 gen(5);
  const char* types[] = {"ALM", "RTN", "ACK"};
  std::string text = kHeader;
  for (int i = 0; i < 200; ++i) {
    text += format_timestamp(at_seconds(gen() % 100000 / 7.0)) + ",tag" + std::to_string(gen() % 9) + "," +
            types[gen() % 3] + ",case" + std::to_string(gen() % 6) + "\n";
  }
  const auto log = parse_alarm_csv(text);
  std::ostringstream out;
  write_alarm_csv(log, out);
  EXPECT_EQ(parse_alarm_csv(out.str()), log);
}

TEST(BuildDataset, KeepsOnlyActivations) {
  const auto log = parse_alarm_csv(csv({"2020-01-01T00:00:00Z,a,ALM,case1", "2020-01-01T00:00:01Z,a,RTN,case1",
                                        "2020-01-01T00:00:02Z,b,ALM,case1", "2020-01-01T00:00:00Z,a,ALM,case2"}));
  const auto built = build_dataset(log, "fault1");
  ASSERT_EQ(built.dataset.traces.size(), 2u);
  EXPECT_EQ(built.dataset.traces[0].activities, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(built.dataset.traces[1].activities, (std::vector<std::string>{"a"}));
  EXPECT_EQ(built.dataset.fault_label, "fault1");
  EXPECT_TRUE(built.cases_without_alarms.empty());
}

TEST(BuildDataset, CaseWithoutAlarmsIsOmitted) {
  const auto log = parse_alarm_csv(csv({"2020-01-01T00:00:00Z,a,RTN,quiet", "2020-01-01T00:00:00Z,a,ALM,loud"}));
  const auto built = build_dataset(log, "f");
  ASSERT_EQ(built.dataset.traces.size(), 1u);
  EXPECT_EQ(built.dataset.traces[0].case_id, "loud");
  EXPECT_EQ(built.cases_without_alarms, std::vector<std::string>{"quiet"});
}

TEST(BuildDataset, SixtyCases) {
  std::string text = kHeader;
  for (int c = 0; c < 60; ++c)
    for (int k = 0; k < 3; ++k)
      text += format_timestamp(at_seconds(k * 30.0)) + ",t" + std::to_string(k) + ",ALM,case" + std::to_string(c) + "\n";
  EXPECT_EQ(build_dataset(parse_alarm_csv(text), "f").dataset.traces.size(), 60u);
}

TEST(BuildDataset, PreservesRelativeOrderProperty) {
  std::mt19937 gen(17);
  for (int round = 0; round < 50; ++round) {
    std::vector<AlarmEvent> events;
    std::map<std::string, std::vector<std::string>> expected;
    for (int i = 0; i < 40; ++i) {
      const auto id = "c" + std::to_string(gen() % 4);
      const auto type = static_cast<MsgType>(gen() % 3);
      const auto tag = "t" + std::to_string(gen() % 5);
      events.push_back({at_seconds(i), tag, type, id});
      if (type == MsgType::Alm) expected[id].push_back(tag);
    }
    const auto ds = build_dataset(AlarmLog(events), "f").dataset;
    ASSERT_EQ(ds.traces.size(), expected.size());
    for (const auto& tr : ds.traces) {
      EXPECT_EQ(tr.activities, expected[tr.case_id]);
      EXPECT_TRUE(std::is_sorted(tr.timestamps->begin(), tr.timestamps->end()));
      for (const auto& a : tr.activities) EXPECT_TRUE(ds.activity_universe().count(a));
    }
  }
}

TEST(BuildDataset, EmptyLogThrows) { EXPECT_THROW(build_dataset(AlarmLog({}), "f"), EmptyLog); }

TEST(DottedChart, CsvRows) {
  Dataset ds;
  ds.traces.push_back(timed("c", {{"a", 0}, {"b", 60}}));
  std::ostringstream out;
  export_dotted_chart(ds, out, ChartFormat::Csv);
  EXPECT_EQ(out.str(), "case,seconds,tag\n0,0,a\n0,60,b\n");
}

TEST(DottedChart, FractionalSecondsAndCaseIndex) {
  Dataset ds;
  ds.traces.push_back(timed("x", {{"a", 5}}));
  ds.traces.push_back(timed("y", {{"b", 10}, {"c", 11.25}}));
  std::ostringstream out;
  export_dotted_chart(ds, out, ChartFormat::Csv);
  EXPECT_EQ(out.str(), "case,seconds,tag\n0,0,a\n1,0,b\n1,1.25,c\n");
}

TEST(DottedChart, RowCountEqualsAlarmCount) {
  std::string text = kHeader;
  for (int c = 0; c < 7; ++c)
    for (int k = 0; k <= c; ++k)
      text += format_timestamp(at_seconds(k)) + ",t" + std::to_string(k) + (k % 2 ? ",RTN," : ",ALM,") + "c" +
              std::to_string(c) + "\n";
  const auto ds = build_dataset(parse_alarm_csv(text), "f").dataset;
  std::ostringstream out;
  export_dotted_chart(ds, out, ChartFormat::Csv);
  const auto chart = out.str();
  const auto lines = std::count(chart.begin(), chart.end(), '\n');
  EXPECT_EQ(static_cast<std::size_t>(lines - 1), ds.event_count());
}

TEST(DottedChart, SvgHasOneRowPerCase) {
  Dataset ds;
  for (int c = 0; c < 60; ++c) ds.traces.push_back(timed("case" + std::to_string(c), {{"a", 0}, {"b", 3600.0 * (c % 5)}}));
  std::ostringstream out;
  export_dotted_chart(ds, out, ChartFormat::Svg);
  const auto svg = out.str();
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  std::size_t rows = 0;
  for (auto pos = svg.find("class=\"case\""); pos != std::string::npos; pos = svg.find("class=\"case\"", pos + 1))
    ++rows;
  EXPECT_EQ(rows, 60u);

  std::ostringstream again;
  export_dotted_chart(ds, again, ChartFormat::Svg);
  EXPECT_EQ(again.str(), svg);
}

TEST(DottedChart, MissingTimestamps) {
  Dataset ds;
  ds.traces.push_back(testing_support::trace({"a"}));
  std::ostringstream out;
  EXPECT_THROW(export_dotted_chart(ds, out, ChartFormat::Csv), MissingTimestamps);
}
