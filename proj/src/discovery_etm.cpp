#include "alarmtop/discovery_etm.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "alarmtop/error.hpp"
#include "alarmtop/petri_net.hpp"
#include "alarmtop/random.hpp"

namespace alarmtop {

namespace {

// Executions of the node at preorder `next`, derived from transition firings.
double executions(const ProcessTree& t, const TreeNet& tn, const std::vector<std::uint64_t>& firings,
                  std::size_t& next, std::vector<double>& out) {
  const auto self = next++;
  std::vector<double> kids;
  for (const auto& c : t.children()) kids.push_back(executions(c, tn, firings, next, out));
  double e = 0;
  if (const auto& tr = tn.node_transition[self]) {
    e = static_cast<double>(firings[index(*tr)]);
  } else if (t.kind() == NodeKind::Xor) {
    e = std::accumulate(kids.begin(), kids.end(), 0.0);
  } else if (!kids.empty()) {
    e = *std::max_element(kids.begin(), kids.end());
  }
  out[self] = e;
  return e;
}

double generalization(const ProcessTree& t, const TreeNet& tn, const std::vector<std::uint64_t>& firings) {
  std::vector<double> exec(t.node_count(), 0.0);
  std::size_t next = 0;
  executions(t, tn, firings, next, exec);
  double sum = 0;
  for (double e : exec) sum += e > 0 ? 1.0 / std::sqrt(e) : 1.0;
  return 1.0 - sum / static_cast<double>(exec.size());
}

std::optional<ProcessTree> without(const ProcessTree& t, std::size_t& next, std::size_t target) {
  const auto self = next++;
  if (self == target) {
    next += t.node_count() - 1;
    return std::nullopt;
  }
  if (t.is_leaf()) return t;
  std::vector<ProcessTree> kids;
  bool body_removed = false;
  for (std::size_t i = 0; i < t.children().size(); ++i) {
    if (auto c = without(t.children()[i], next, target)) kids.push_back(std::move(*c));
    else if (i == 0) body_removed = true;
  }
  if (t.kind() == NodeKind::Loop && body_removed) kids.insert(kids.begin(), ProcessTree::tau());
  if (kids.empty()) return ProcessTree::tau();
  if (kids.size() == 1) return std::move(kids.front());
  return ProcessTree::make(t.kind(), std::move(kids));
}

std::vector<std::size_t> indices_where(const ProcessTree& t, bool leaves) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0, n = t.node_count(); i < n; ++i)
    if (node_at(t, i).is_leaf() == leaves) out.push_back(i);
  return out;
}

const NodeKind kOperators[] = {NodeKind::Xor, NodeKind::Seq, NodeKind::And, NodeKind::Loop};

ProcessTree fresh_leaf(const ProcessTree& t, const std::vector<std::string>& acts, Rng& rng) {
  const auto labels = leaf_labels(t);
  const std::set<std::string> present(labels.begin(), labels.end());
  std::vector<std::string> missing;
  for (const auto& a : acts)
    if (!present.count(a)) missing.push_back(a);
  if (!missing.empty() && rng.chance(0.5)) return ProcessTree::activity(missing[rng.below(missing.size())]);
  return ProcessTree::activity(acts[rng.below(acts.size())]);
}

ProcessTree replace_subtree(const ProcessTree& t, const std::set<std::string>& activities, Rng& rng,
                            const TreeGenConfig& cfg) {
  auto small = cfg;
  small.max_depth = std::min<std::size_t>(cfg.max_depth, 2);
  return replace_at(t, rng.below(t.node_count()), random_tree(activities, rng.next(), small));
}

ProcessTree trace_tree(const Trace& tr) {
  if (tr.activities.empty()) return ProcessTree::tau();
  std::vector<ProcessTree> kids;
  for (const auto& a : tr.activities) kids.push_back(ProcessTree::activity(a));
  if (kids.size() == 1) return std::move(kids.front());
  return ProcessTree::make(NodeKind::Seq, std::move(kids));
}

struct Candidate {
  ProcessTree tree;
  std::string key;
  Evaluation eval;
};

class Evaluator {
 public:
  Evaluator(const Dataset& ds, const EtmConfig& cfg) : ds_(ds), cfg_(cfg) {
    workers_ = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  }

  void score(std::vector<Candidate>& pop) {
    std::vector<std::size_t> todo;
    std::set<std::string> queued;
    for (std::size_t i = 0; i < pop.size(); ++i)
      if (!cache_.count(pop[i].key) && queued.insert(pop[i].key).second) todo.push_back(i);

    std::vector<Evaluation> results(todo.size());
    std::atomic<std::size_t> cursor{0};
    auto work = [&] {
      for (std::size_t k; (k = cursor.fetch_add(1)) < todo.size();) results[k] = one(pop[todo[k]].tree);
    };
    const auto n = std::min(workers_, todo.size());
    if (n <= 1) {
      work();
    } else {
      std::vector<std::thread> threads;
      for (std::size_t w = 0; w < n; ++w) threads.emplace_back(work);
      for (auto& th : threads) th.join();
    }
    for (std::size_t k = 0; k < todo.size(); ++k) cache_.emplace(pop[todo[k]].key, results[k]);
    for (auto& c : pop) c.eval = cache_.at(c.key);
  }

 private:
  Evaluation one(const ProcessTree& t) const {
    AlignmentOptions opts;
    opts.state_budget = cfg_.alignment_budget;
    opts.unmatched_suffix_heuristic = true;
    try {
      return overall_fitness(t, ds_, cfg_.weights, opts);
    } catch (const StateBudgetExceeded&) {
      return {};
    }
  }

  const Dataset& ds_;
  const EtmConfig& cfg_;
  std::size_t workers_ = 1;
  std::unordered_map<std::string, Evaluation> cache_;
};

Candidate candidate(ProcessTree t) {
  auto c = canonicalize(t);
  auto key = format_tree(c);
  return {std::move(c), std::move(key), {}};
}

void rank(std::vector<Candidate>& pop) {
  std::stable_sort(pop.begin(), pop.end(), [](const Candidate& a, const Candidate& b) {
    if (a.eval.overall != b.eval.overall) return a.eval.overall > b.eval.overall;
    const auto na = a.tree.node_count(), nb = b.tree.node_count();
    if (na != nb) return na < nb;
    return a.key < b.key;
  });
}

}  // namespace

Evaluation overall_fitness(const ProcessTree& tree, const Dataset& ds, const QualityWeights& weights,
                           const AlignmentOptions& options) {
  if (ds.empty()) throw EmptyDataset();
  const auto tn = convert_tree(tree);
  const ConformanceChecker checker(tn.net, options);
  const auto replay = checker.replay(ds);

  Evaluation ev;
  ev.components.fitness = replay.fitness;
  ev.components.precision = replay.precision;
  ev.components.generalization = generalization(tree, tn, replay.transition_firings);
  ev.components.simplicity = simplicity(tree, ds.activity_universe());

  const double total = weights.fitness + weights.precision + weights.generalization + weights.simplicity;
  if (!(total > 0)) throw std::invalid_argument("quality weights must have a positive sum");
  ev.overall = (weights.fitness * ev.components.fitness + weights.precision * ev.components.precision +
                weights.generalization * ev.components.generalization +
                weights.simplicity * ev.components.simplicity) /
               total;
  return ev;
}

ProcessTree mutate(const ProcessTree& tree, const std::set<std::string>& activities, std::uint64_t seed,
                   const TreeGenConfig& cfg) {
  if (activities.empty()) throw std::invalid_argument("mutate needs at least one activity");
  const std::vector<std::string> acts(activities.begin(), activities.end());
  Rng rng(seed);
  const auto t = canonicalize(tree);

  switch (rng.below(4)) {
    case 0:
      return canonicalize(replace_subtree(t, activities, rng, cfg));
    case 1: {
      const auto ops = indices_where(t, false);
      if (ops.empty()) break;
      const auto at = ops[rng.below(ops.size())];
      const auto& node = node_at(t, at);
      std::vector<NodeKind> others;
      for (auto k : kOperators)
        if (k != node.kind()) others.push_back(k);
      return canonicalize(replace_at(t, at, ProcessTree::make(others[rng.below(others.size())], node.children())));
    }
    case 2: {
      const auto at = rng.below(t.node_count());
      const auto& node = node_at(t, at);
      auto leaf = fresh_leaf(t, acts, rng);
      if (node.is_leaf()) {
        std::vector<ProcessTree> kids{node, std::move(leaf)};
        if (rng.chance(0.5)) std::swap(kids[0], kids[1]);
        return canonicalize(replace_at(t, at, ProcessTree::make(kOperators[rng.below(4)], std::move(kids))));
      }
      auto kids = node.children();
      kids.insert(kids.begin() + static_cast<std::ptrdiff_t>(rng.below(kids.size() + 1)), std::move(leaf));
      return canonicalize(replace_at(t, at, ProcessTree::make(node.kind(), std::move(kids))));
    }
    default: {
      auto leaves = indices_where(t, true);
      std::erase(leaves, 0);
      if (leaves.empty()) break;
      std::size_t next = 0;
      return canonicalize(*without(t, next, leaves[rng.below(leaves.size())]));
    }
  }
  return canonicalize(replace_subtree(t, activities, rng, cfg));
}

ProcessTree crossover(const ProcessTree& a, const ProcessTree& b, std::uint64_t seed) {
  Rng rng(seed);
  const auto at = rng.below(a.node_count());
  const auto& donor = node_at(b, rng.below(b.node_count()));
  return canonicalize(replace_at(a, at, donor));
}

void EtmConfig::validate() const {
  if (population_size < 2) throw std::invalid_argument("population size must be at least 2");
  if (elite_count >= population_size) throw std::invalid_argument("elite count must be below the population size");
  if (tournament_size == 0) throw std::invalid_argument("tournament size must be positive");
  for (double r : {crossover_rate, immigrant_rate})
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("rates must lie in [0, 1]");
  for (double w : {weights.fitness, weights.precision, weights.generalization, weights.simplicity})
    if (!(w >= 0.0)) throw std::invalid_argument("quality weights must be non-negative");
  if (!(weights.fitness + weights.precision + weights.generalization + weights.simplicity > 0))
    throw std::invalid_argument("quality weights must have a positive sum");
}

EtmResult discover_etm(const Dataset& ds, const EtmConfig& cfg) {
  if (ds.empty()) throw EmptyDataset();
  cfg.validate();
  const auto activities = ds.activity_universe();
  if (activities.empty()) {
    // Only empty traces: nothing to search over.
    EtmResult r{ProcessTree::tau(), {}};
    const auto ev = overall_fitness(r.tree, ds, cfg.weights);
    r.report.best_components = ev.components;
    r.report.best_overall = ev.overall;
    r.report.history.push_back(r.report.best_overall);
    return r;
  }

  Evaluator evaluator(ds, cfg);
  std::vector<Candidate> pop;
  {
    Rng rng(mix_seed(cfg.seed, 0));
    for (std::size_t i = 0; i < cfg.population_size; ++i) {
      if (i % 2 == 0) pop.push_back(candidate(trace_tree(ds.traces[rng.below(ds.traces.size())])));
      else pop.push_back(candidate(random_tree(activities, rng.next(), cfg.tree)));
    }
  }
  evaluator.score(pop);
  rank(pop);

  EtmReport report;
  report.history.push_back(pop.front().eval.overall);
  std::size_t stagnant = 0;
  auto tournament = [&](Rng& rng) -> const Candidate& {
    std::size_t best = pop.size();
    for (std::size_t k = 0; k < cfg.tournament_size; ++k) best = std::min(best, rng.below(pop.size()));
    return pop[best];
  };

  for (std::size_t gen = 1; gen <= cfg.max_generations; ++gen) {
    if (pop.front().eval.overall >= cfg.target_overall - 1e-12 || stagnant >= cfg.stagnation_limit) break;
    Rng rng(mix_seed(cfg.seed, gen));
    std::vector<Candidate> next(pop.begin(), pop.begin() + static_cast<std::ptrdiff_t>(cfg.elite_count));
    while (next.size() < cfg.population_size) {
      if (rng.chance(cfg.immigrant_rate)) {
        next.push_back(candidate(random_tree(activities, rng.next(), cfg.tree)));
        continue;
      }
      const auto& parent = tournament(rng);
      auto child = parent.tree;
      if (rng.chance(cfg.crossover_rate)) child = crossover(child, tournament(rng).tree, rng.next());
      if (child == parent.tree || rng.chance(0.5)) child = mutate(child, activities, rng.next(), cfg.tree);
      next.push_back(candidate(std::move(child)));
    }
    const double before = pop.front().eval.overall;
    pop = std::move(next);
    evaluator.score(pop);
    rank(pop);
    report.generations_run = gen;
    report.history.push_back(pop.front().eval.overall);
    stagnant = pop.front().eval.overall > before + 1e-12 ? 0 : stagnant + 1;
  }

  report.best_overall = pop.front().eval.overall;
  report.best_components = pop.front().eval.components;
  return {pop.front().tree, std::move(report)};
}

}  // namespace alarmtop
