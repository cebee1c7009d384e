#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "alarmtop/alarm_log.hpp"
#include "alarmtop/petri_net.hpp"
#include "alarmtop/process_tree.hpp"

namespace alarmtop {

enum class MoveKind { Sync, Log, Model };

/// One step of an alignment. Sync moves carry both sides, log moves only the
/// activity, model moves only the transition.
struct Move {
  MoveKind kind = MoveKind::Sync;
  std::string activity;
  std::optional<TransitionId> transition;
  bool silent = false;

  bool operator==(const Move&) const = default;
};

struct Alignment {
  std::vector<Move> moves;
  double cost = 0.0;
};

/// Unit costs: log moves and visible model moves cost 1, sync and silent
/// model moves are free.
struct AlignmentOptions {
  std::size_t state_budget = 1'000'000;
  /// Lower-bounds the remaining cost by the number of remaining events whose
  /// activity labels no transition of the net. Admissible and consistent.
  bool unmatched_suffix_heuristic = false;
};

/// Per-variant replay summary of a dataset.
struct ReplaySummary {
  double fitness = 1.0;
  double precision = 1.0;
  /// Firings per transition over all optimal alignments, trace-weighted.
  std::vector<std::uint64_t> transition_firings;
};

/// Alignment-based conformance of one net. The net must outlive the checker.
/// Safe to share between threads.
class ConformanceChecker {
 public:
  explicit ConformanceChecker(const PetriNet& net, AlignmentOptions options = {});

  /// Minimum-cost alignment found by shortest-path search over
  /// (trace position, marking). Ties prefer sync moves, then silent model
  /// moves, then lower transition ids. Throws FinalMarkingUnreachable or
  /// StateBudgetExceeded.
  Alignment align(const Trace& trace) const;

  /// Cost of the alignment without synchronous moves: every event as a log
  /// move plus the cheapest visible run of the model.
  double reference_cost(const Trace& trace) const;
  /// Fewest visible transitions on any run from the initial to the final
  /// marking; computed once.
  double model_run_cost() const;

  /// 1 - optimal cost / reference cost; 1 when both are zero.
  double trace_fitness(const Trace& trace) const;
  /// Mean trace fitness, every trace counted once.
  double fitness(const Dataset& ds) const;
  /// Escaping-edges precision over alignment-projected model runs.
  double precision(const Dataset& ds) const;
  ReplaySummary replay(const Dataset& ds) const;

  const PetriNet& net() const noexcept { return net_; }

 private:
  struct Compiled;
  struct Search;

  std::vector<int> encode(const Trace& trace) const;
  Alignment search(const std::vector<int>& trace, const std::vector<std::string>& labels) const;

  const PetriNet& net_;
  AlignmentOptions options_;
  std::shared_ptr<const Compiled> compiled_;
  mutable std::once_flag model_cost_once_;
  mutable double model_cost_ = 0.0;
};

Alignment optimal_alignment(const PetriNet& net, const Trace& trace, const AlignmentOptions& options = {});
double reference_cost(const PetriNet& net, const Trace& trace);
double fitness(const PetriNet& net, const Dataset& ds);
double precision(const PetriNet& net, const Dataset& ds);

/// Train/test conformance of a tree, laid out as fitness and precision per
/// split with the gaps between them as the generalization indicator.
struct QualityReport {
  double fitness_train = 0;
  double fitness_test = 0;
  double precision_train = 0;
  double precision_test = 0;
  double generalization_gap_fitness = 0;
  double generalization_gap_precision = 0;
  double simplicity = 0;
};

/// Throws EmptyDataset when either split is empty.
QualityReport evaluate(const ProcessTree& tree, const Dataset& train, const Dataset& test,
                       const AlignmentOptions& options = {});

/// JSON object with the seven report fields, rounded to 4 decimals.
std::string quality_to_json(const QualityReport& report);
/// Plain-text table, rows fitness/precision, columns training/testing.
std::string quality_table(const QualityReport& report);

}  // namespace alarmtop
