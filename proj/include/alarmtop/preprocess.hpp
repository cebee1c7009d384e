#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "alarmtop/alarm_log.hpp"

namespace alarmtop {

/// Audit record of one preparation step.
struct PreprocessReport {
  std::string step;
  std::size_t events_before = 0;
  std::size_t events_after = 0;
  std::set<std::string> tags_removed;
  std::size_t cases_truncated = 0;
  std::vector<std::string> warnings;
};

using Preprocessed = std::pair<Dataset, PreprocessReport>;

/// Keeps the events within `cutoff` of each case's first event.
/// Throws MissingTimestamps; cutoff must be positive.
Preprocessed truncate_transitional(const Dataset& ds, Duration cutoff);

/// Per-tag debounce: an activation is dropped when the previous retained
/// activation of the same tag in the same case is less than `window` earlier.
Preprocessed remove_chattering(const Dataset& ds, Duration window);

/// Keeps only the first appearance of every tag in each case.
Preprocessed first_occurrence_filter(const Dataset& ds);

/// Drops tags present in fewer than ceil(min_support * |traces|) traces.
Preprocessed remove_insignificant_tags(const Dataset& ds, double min_support);

/// Seeded random partition; |train| = round(train_fraction * |traces|),
/// kept within [1, |traces| - 1]. Traces keep their original order.
std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double train_fraction,
                                             std::uint64_t seed);

void write_report(const PreprocessReport& report, std::ostream& out);

}  // namespace alarmtop
