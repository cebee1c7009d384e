#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "alarmtop/alarm_log.hpp"
#include "alarmtop/conformance.hpp"
#include "alarmtop/process_tree.hpp"

namespace alarmtop {

struct QualityWeights {
  double fitness = 10;
  double precision = 5;
  double generalization = 1;
  double simplicity = 1;
};

struct QualityComponents {
  double fitness = 0;
  double precision = 0;
  double generalization = 0;
  double simplicity = 0;
};

struct Evaluation {
  double overall = 0;
  QualityComponents components;
};

/// Weighted mean of alignment fitness, escaping-edges precision,
/// frequency-of-use generalization and simplicity, all measured on ds.
///
/// Generalization is 1 - sum(executions(node)^-1/2) / nodes, where the
/// executions of a node are counted on the optimal alignments; a node that
/// never executes contributes 1.
Evaluation overall_fitness(const ProcessTree& tree, const Dataset& ds, const QualityWeights& weights,
                           const AlignmentOptions& options = {});

/// One seeded edit: replace a subtree by a random tree, change an operator,
/// add a leaf or remove a leaf. The result is canonical.
ProcessTree mutate(const ProcessTree& tree, const std::set<std::string>& activities, std::uint64_t seed,
                   const TreeGenConfig& cfg = {});

/// A random subtree of `a` replaced by a random subtree of `b`.
ProcessTree crossover(const ProcessTree& a, const ProcessTree& b, std::uint64_t seed);

struct EtmConfig {
  QualityWeights weights;
  std::size_t population_size = 50;
  std::size_t elite_count = 5;
  std::size_t max_generations = 300;
  double target_overall = 1.0;
  /// Generations without improvement of the best candidate before stopping.
  std::size_t stagnation_limit = 50;
  std::uint64_t seed = 1;

  std::size_t tournament_size = 4;
  double crossover_rate = 0.25;
  double immigrant_rate = 0.05;
  TreeGenConfig tree;
  /// Per-trace alignment state cap; a candidate exceeding it scores zero.
  std::size_t alignment_budget = 200'000;
  /// Evaluation threads; 0 picks the hardware concurrency.
  std::size_t workers = 0;

  /// Throws std::invalid_argument.
  void validate() const;
};

struct EtmReport {
  std::size_t generations_run = 0;
  double best_overall = 0;
  QualityComponents best_components;
  /// Best overall score after initialisation and after every generation.
  std::vector<double> history;
};

struct EtmResult {
  ProcessTree tree;
  EtmReport report;
};

/// Genetic search with elitism and tournament selection. Stops when the
/// target score is reached, after `stagnation_limit` generations without
/// improvement, or after `max_generations`. Results depend only on the
/// dataset and the configuration, not on the worker count.
/// Throws EmptyDataset.
EtmResult discover_etm(const Dataset& ds, const EtmConfig& cfg);

}  // namespace alarmtop
