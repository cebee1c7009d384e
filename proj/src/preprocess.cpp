#include "alarmtop/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "alarmtop/error.hpp"
#include "alarmtop/random.hpp"

namespace alarmtop {

namespace {

void require_timestamps(const Dataset& ds) {
  for (const auto& tr : ds.traces)
    if (!tr.timestamps) throw MissingTimestamps(tr.case_id);
}

// Applies keep(trace, k) to every event and assembles the report.
template <typename Keep>
Preprocessed filter_events(const Dataset& ds, std::string step, Keep&& keep) {
  Preprocessed result;
  auto& [out, report] = result;
  report.step = std::move(step);
  out.fault_label = ds.fault_label;
  for (const auto& tr : ds.traces) {
    Trace kept{tr.case_id, {}, std::nullopt};
    if (tr.timestamps) kept.timestamps.emplace();
    const auto mask = keep(tr);
    for (std::size_t k = 0; k < tr.size(); ++k) {
      if (!mask[k]) continue;
      kept.activities.push_back(tr.activities[k]);
      if (tr.timestamps) kept.timestamps->push_back((*tr.timestamps)[k]);
    }
    report.events_before += tr.size();
    report.events_after += kept.size();
    if (kept.size() < tr.size()) ++report.cases_truncated;
    if (kept.empty())
      report.warnings.push_back("case " + tr.case_id + " left empty, dropped");
    else
      out.traces.push_back(std::move(kept));
  }
  return result;
}

}  // namespace

Preprocessed truncate_transitional(const Dataset& ds, Duration cutoff) {
  if (cutoff <= Duration::zero()) throw std::invalid_argument("cutoff must be positive");
  require_timestamps(ds);
  return filter_events(ds, "truncate_transitional", [&](const Trace& tr) {
    std::vector<bool> mask(tr.size(), true);
    if (tr.empty()) return mask;
    const auto start = tr.timestamps->front();
    for (std::size_t k = 0; k < tr.size(); ++k) mask[k] = (*tr.timestamps)[k] - start <= cutoff;
    return mask;
  });
}

Preprocessed remove_chattering(const Dataset& ds, Duration window) {
  if (window < Duration::zero()) throw std::invalid_argument("window must be non-negative");
  require_timestamps(ds);
  return filter_events(ds, "remove_chattering", [&](const Trace& tr) {
    std::vector<bool> mask(tr.size(), true);
    std::map<std::string_view, TimePoint> last_kept;
    for (std::size_t k = 0; k < tr.size(); ++k) {
      const auto t = (*tr.timestamps)[k];
      auto it = last_kept.find(tr.activities[k]);
      if (it != last_kept.end() && t - it->second < window) {
        mask[k] = false;
        continue;
      }
      last_kept[tr.activities[k]] = t;
    }
    return mask;
  });
}

Preprocessed first_occurrence_filter(const Dataset& ds) {
  return filter_events(ds, "first_occurrence_filter", [](const Trace& tr) {
    std::vector<bool> mask(tr.size(), true);
    std::set<std::string_view> seen;
    for (std::size_t k = 0; k < tr.size(); ++k) mask[k] = seen.insert(tr.activities[k]).second;
    return mask;
  });
}

Preprocessed remove_insignificant_tags(const Dataset& ds, double min_support) {
  if (!(min_support >= 0.0 && min_support <= 1.0))
    throw std::invalid_argument("min_support must lie in [0, 1]");
  std::map<std::string, std::size_t> presence;
  for (const auto& tr : ds.traces) {
    std::set<std::string_view> in_trace(tr.activities.begin(), tr.activities.end());
    for (auto a : in_trace) ++presence[std::string(a)];
  }
  // Guard against 0.1 * 60 landing a hair above 6.
  const auto needed = static_cast<std::size_t>(
      std::ceil(min_support * static_cast<double>(ds.traces.size()) - 1e-9));
  std::set<std::string> removed;
  for (const auto& [tag, count] : presence)
    if (count < needed) removed.insert(tag);

  auto result = filter_events(ds, "remove_insignificant_tags", [&](const Trace& tr) {
    std::vector<bool> mask(tr.size());
    for (std::size_t k = 0; k < tr.size(); ++k) mask[k] = !removed.count(tr.activities[k]);
    return mask;
  });
  result.second.tags_removed = std::move(removed);
  return result;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double train_fraction,
                                             std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("train_fraction must lie in (0, 1)");
  const std::size_t n = ds.traces.size();
  if (n < 2) throw TooFewTraces(n, 2);

  auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n) + 0.5));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);

  std::vector<bool> in_train(n, false);
  for (std::size_t i = 0; i < n_train; ++i) in_train[order[i]] = true;

  std::pair<Dataset, Dataset> split;
  split.first.fault_label = split.second.fault_label = ds.fault_label;
  for (std::size_t i = 0; i < n; ++i)
    (in_train[i] ? split.first : split.second).traces.push_back(ds.traces[i]);
  return split;
}

void write_report(const PreprocessReport& report, std::ostream& out) {
  out << "[" << report.step << "]\n";
  out << "events_before: " << report.events_before << '\n';
  out << "events_after: " << report.events_after << '\n';
  out << "cases_truncated: " << report.cases_truncated << '\n';
  out << "tags_removed:";
  for (const auto& t : report.tags_removed) out << ' ' << t;
  out << '\n';
  for (const auto& w : report.warnings) out << "warning: " << w << '\n';
}

}  // namespace alarmtop
