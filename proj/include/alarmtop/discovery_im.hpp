#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "alarmtop/alarm_log.hpp"
#include "alarmtop/process_tree.hpp"

namespace alarmtop {

/// Directly-follows graph of a dataset. Empty traces contribute nothing.
struct Dfg {
  std::map<std::pair<std::string, std::string>, std::size_t> edges;
  std::map<std::string, std::size_t> start_activities;
  std::map<std::string, std::size_t> end_activities;
  std::map<std::string, std::size_t> activity_counts;

  std::set<std::string> activities() const;
  bool has_edge(const std::string& from, const std::string& to) const {
    return edges.count({from, to}) != 0;
  }
};

enum class CutKind { Exclusive, Sequence, Parallel, Loop };

std::string_view to_string(CutKind kind);

/// Partition of the activities with the operator that joins the parts.
/// For Sequence cuts the parts are in execution order; for Loop cuts the
/// first part is the body.
struct Cut {
  CutKind kind = CutKind::Exclusive;
  std::vector<std::set<std::string>> parts;
};

/// Throws EmptyDataset.
Dfg build_dfg(const Dataset& ds);

/// Tries Exclusive, Sequence, Parallel and Loop cuts in that order and
/// returns the first one that holds, or nothing.
std::optional<Cut> find_cut(const Dfg& g);

struct DatasetSplit {
  std::vector<Dataset> parts;
  /// Events that had to be removed because they fall outside their part.
  std::size_t events_dropped = 0;
};

/// Projects every trace onto the parts of the cut.
///  - Exclusive: the trace goes to the part holding most of its events.
///  - Sequence: the trace is cut at the boundaries that misplace the fewest
///    events.
///  - Parallel: the trace is projected onto every part.
///  - Loop: the trace is cut wherever it moves between body and redo parts;
///    empty body iterations are inserted where two redo runs touch.
DatasetSplit split_dataset(const Dataset& ds, const Cut& cut);

/// Removes an edge x->y whose count is below threshold times the largest
/// outgoing count of x; start and end activities are filtered against the
/// largest start and end counts.
Dfg filter_infrequent(const Dfg& g, double threshold);

/// Recursive cut-based discovery. The DFG is filtered with `threshold`
/// only where the unfiltered graph admits no cut; when no cut is found at
/// all the remaining activities become a flower loop(tau, a1, ..., an).
/// Throws EmptyDataset.
ProcessTree discover_im(const Dataset& ds, double threshold = 0.3);

}  // namespace alarmtop
