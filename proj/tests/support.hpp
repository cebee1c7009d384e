#pragma once

#include <chrono>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "alarmtop/alarm_log.hpp"

namespace testing_support {

using namespace alarmtop;

inline TimePoint at_seconds(double s) {
  return TimePoint{std::chrono::sys_days{std::chrono::year{2020} / 1 / 1}.time_since_epoch()} +
         Duration(static_cast<Duration::rep>(s * 1000));
}

inline Trace trace(std::vector<std::string> acts, std::string id = "c") {
  return Trace{std::move(id), std::move(acts), std::nullopt};
}

/// Trace with one timestamp per (tag, seconds) pair.
inline Trace timed(std::string id, std::vector<std::pair<std::string, double>> events) {
  Trace t{std::move(id), {}, std::vector<TimePoint>{}};
  for (auto& [tag, s] : events) {
    t.activities.push_back(tag);
    t.timestamps->push_back(at_seconds(s));
  }
  return t;
}

/// Dataset from (variant, multiplicity) pairs; cases numbered in order.
inline Dataset variants(std::vector<std::pair<std::vector<std::string>, int>> vs, bool with_times = false) {
  Dataset ds;
  ds.fault_label = "test";
  int id = 0;
  for (auto& [acts, n] : vs)
    for (int i = 0; i < n; ++i) {
      auto t = trace(acts, "case" + std::to_string(1000 + id++));
      if (with_times) {
        t.timestamps.emplace();
        for (std::size_t k = 0; k < acts.size(); ++k) t.timestamps->push_back(at_seconds(60.0 * k));
      }
      ds.traces.push_back(std::move(t));
    }
  return ds;
}

/// The four-variant example dataset: abce x45, acbe x30, ade x45, ae x30.
inline Dataset sample_dataset(bool with_times = false) {
  return variants({{{"a", "b", "c", "e"}, 45}, {{"a", "c", "b", "e"}, 30}, {{"a", "d", "e"}, 45}, {{"a", "e"}, 30}},
                  with_times);
}

inline const char* kExampleTree = "seq(a, xor(and(b, c), d, tau), e)";

}  // namespace testing_support
