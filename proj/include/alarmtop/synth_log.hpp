#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "alarmtop/alarm_log.hpp"
#include "alarmtop/process_tree.hpp"

namespace alarmtop {

/// Random walk over a ground-truth tree: uniform choice at Xor nodes,
/// uniformly random interleaving at And nodes, and at Loop nodes a further
/// round with probability `redo_probability`, capped at `max_loop_unroll`
/// rounds. Events are one minute apart; cases are named case001, case002, ...
Dataset sample_log(const ProcessTree& tree, std::size_t n, std::uint64_t seed, std::size_t max_loop_unroll = 2,
                   double redo_probability = 0.5);

struct NoiseSpec {
  double swap_rate = 0;    // per adjacent pair
  double drop_rate = 0;    // per event
  double insert_rate = 0;  // per trace: one random activity at a random position
  std::set<std::string> alphabet;
};

struct NoisyDataset {
  Dataset dataset;
  std::vector<std::string> warnings;
};

/// Applies swaps, then drops, then insertions. Traces left empty are removed
/// with a warning. Timestamps are re-spaced one minute apart.
NoisyDataset inject_noise(const Dataset& ds, const NoiseSpec& spec, std::uint64_t seed);

}  // namespace alarmtop
