#include "alarmtop/conformance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "alarmtop/error.hpp"

namespace alarmtop {

// Net flattened for the search: markings are byte strings, one byte per place.
struct ConformanceChecker::Compiled {
  std::size_t places = 0;
  std::vector<std::vector<std::pair<std::uint32_t, std::uint8_t>>> consume;
  std::vector<std::vector<std::uint32_t>> produce;
  std::vector<int> label;  // -1 for silent transitions
  std::map<std::string, int> label_ids;
  std::vector<std::vector<std::uint32_t>> by_label;
  std::vector<std::uint32_t> silent;
  std::vector<std::uint32_t> visible;
  std::string initial;
  std::string final;

  explicit Compiled(const PetriNet& net) : places(net.places().size()) {
    const auto nt = net.transitions().size();
    consume.resize(nt);
    produce.resize(nt);
    label.resize(nt, -1);
    for (std::size_t t = 0; t < nt; ++t) {
      const auto id = static_cast<TransitionId>(t);
      std::map<std::uint32_t, std::uint8_t> need;
      for (auto p : net.preset(id)) ++need[static_cast<std::uint32_t>(index(p))];
      consume[t].assign(need.begin(), need.end());
      for (auto p : net.postset(id)) produce[t].push_back(static_cast<std::uint32_t>(index(p)));
      const auto& tr = net.transition(id);
      if (tr.silent) {
        silent.push_back(static_cast<std::uint32_t>(t));
        continue;
      }
      auto [it, fresh] = label_ids.emplace(tr.label, static_cast<int>(by_label.size()));
      if (fresh) by_label.emplace_back();
      label[t] = it->second;
      by_label[static_cast<std::size_t>(it->second)].push_back(static_cast<std::uint32_t>(t));
      visible.push_back(static_cast<std::uint32_t>(t));
    }
    initial = pack(net.initial_marking());
    final = pack(net.final_marking());
  }

  static std::string pack(const Marking& m) {
    std::string out(m.place_count(), '\0');
    for (std::size_t i = 0; i < m.place_count(); ++i) {
      if (m.counts()[i] > 255) throw Error("marking exceeds 255 tokens in one place");
      out[i] = static_cast<char>(m.counts()[i]);
    }
    return out;
  }

  bool enabled(const std::string& m, std::uint32_t t) const {
    for (auto [p, n] : consume[t])
      if (static_cast<std::uint8_t>(m[p]) < n) return false;
    return true;
  }

  std::string fire(const std::string& m, std::uint32_t t) const {
    std::string next = m;
    for (auto [p, n] : consume[t]) next[p] = static_cast<char>(static_cast<std::uint8_t>(next[p]) - n);
    for (auto p : produce[t]) {
      auto v = static_cast<std::uint8_t>(next[p]);
      if (v == 255) throw Error("marking exceeds 255 tokens in one place");
      next[p] = static_cast<char>(v + 1);
    }
    return next;
  }
};

namespace {

constexpr std::uint32_t kNone = UINT32_MAX;
constexpr int kAbsent = -2;  // activity without any transition

struct SearchNode {
  std::string key;  // marking bytes followed by 4 bytes of trace position
  std::uint32_t pos;
  std::uint32_t g;
  std::uint32_t parent;
  MoveKind move;
  std::uint32_t transition;
  bool closed;
};

std::string make_key(const std::string& marking, std::uint32_t pos) {
  std::string key = marking;
  key.append(reinterpret_cast<const char*>(&pos), sizeof pos);
  return key;
}

}  // namespace

ConformanceChecker::ConformanceChecker(const PetriNet& net, AlignmentOptions options)
    : net_(net), options_(options), compiled_(std::make_shared<const Compiled>(net)) {}

std::vector<int> ConformanceChecker::encode(const Trace& trace) const {
  std::vector<int> out;
  out.reserve(trace.size());
  for (const auto& a : trace.activities) {
    auto it = compiled_->label_ids.find(a);
    out.push_back(it == compiled_->label_ids.end() ? kAbsent : it->second);
  }
  return out;
}

Alignment ConformanceChecker::search(const std::vector<int>& trace, const std::vector<std::string>& labels) const {
  const Compiled& net = *compiled_;
  const auto n = static_cast<std::uint32_t>(trace.size());

  std::vector<std::uint32_t> h(n + 1, 0);
  if (options_.unmatched_suffix_heuristic)
    for (std::uint32_t i = n; i > 0; --i) h[i - 1] = h[i] + (trace[i - 1] == kAbsent ? 1 : 0);

  std::vector<SearchNode> nodes;
  std::unordered_map<std::string, std::uint32_t> lookup;
  std::vector<std::vector<std::uint32_t>> buckets;

  auto push = [&](std::uint32_t id) {
    const std::size_t f = nodes[id].g + h[nodes[id].pos];
    if (buckets.size() <= f) buckets.resize(f + 1);
    buckets[f].push_back(id);
  };
  auto relax = [&](const std::string& marking, std::uint32_t pos, std::uint32_t g, std::uint32_t parent,
                   MoveKind move, std::uint32_t transition) {
    auto key = make_key(marking, pos);
    auto it = lookup.find(key);
    if (it == lookup.end()) {
      if (nodes.size() >= options_.state_budget) throw StateBudgetExceeded(options_.state_budget);
      const auto id = static_cast<std::uint32_t>(nodes.size());
      lookup.emplace(key, id);
      nodes.push_back({std::move(key), pos, g, parent, move, transition, false});
      push(id);
      return;
    }
    auto& node = nodes[it->second];
    if (node.closed || g >= node.g) return;
    node.g = g;
    node.parent = parent;
    node.move = move;
    node.transition = transition;
    push(it->second);
  };

  relax(net.initial, 0, 0, kNone, MoveKind::Sync, kNone);
  std::uint32_t goal = kNone;
  for (std::size_t f = 0; f < buckets.size() && goal == kNone; ++f) {
    for (std::size_t i = 0; i < buckets[f].size(); ++i) {
      const std::uint32_t id = buckets[f][i];
      if (nodes[id].closed || nodes[id].g + h[nodes[id].pos] != f) continue;
      nodes[id].closed = true;
      const std::uint32_t pos = nodes[id].pos;
      const std::uint32_t g = nodes[id].g;
      const std::string marking = nodes[id].key.substr(0, net.places);
      if (pos == n && marking == net.final) {
        goal = id;
        break;
      }
      if (pos < n && trace[pos] >= 0)
        for (auto t : net.by_label[static_cast<std::size_t>(trace[pos])])
          if (net.enabled(marking, t)) relax(net.fire(marking, t), pos + 1, g, id, MoveKind::Sync, t);
      for (auto t : net.silent)
        if (net.enabled(marking, t)) relax(net.fire(marking, t), pos, g, id, MoveKind::Model, t);
      if (pos < n) relax(marking, pos + 1, g + 1, id, MoveKind::Log, kNone);
      for (auto t : net.visible)
        if (net.enabled(marking, t)) relax(net.fire(marking, t), pos, g + 1, id, MoveKind::Model, t);
    }
  }
  if (goal == kNone) throw FinalMarkingUnreachable();

  Alignment out;
  out.cost = nodes[goal].g;
  for (std::uint32_t id = goal; nodes[id].parent != kNone; id = nodes[id].parent) {
    const auto& node = nodes[id];
    Move mv;
    mv.kind = node.move;
    if (node.move != MoveKind::Model) mv.activity = labels[nodes[node.parent].pos];
    if (node.move != MoveKind::Log) {
      mv.transition = TransitionId(node.transition);
      mv.silent = net.label[node.transition] < 0;
    }
    out.moves.push_back(std::move(mv));
  }
  std::reverse(out.moves.begin(), out.moves.end());
  return out;
}

Alignment ConformanceChecker::align(const Trace& trace) const { return search(encode(trace), trace.activities); }

double ConformanceChecker::model_run_cost() const {
  std::call_once(model_cost_once_, [this] { model_cost_ = search({}, {}).cost; });
  return model_cost_;
}

double ConformanceChecker::reference_cost(const Trace& trace) const {
  return static_cast<double>(trace.size()) + model_run_cost();
}

double ConformanceChecker::trace_fitness(const Trace& trace) const {
  const double ref = reference_cost(trace);
  if (ref <= 0) return 1.0;
  return 1.0 - align(trace).cost / ref;
}

double ConformanceChecker::fitness(const Dataset& ds) const { return replay(ds).fitness; }

double ConformanceChecker::precision(const Dataset& ds) const { return replay(ds).precision; }

ReplaySummary ConformanceChecker::replay(const Dataset& ds) const {
  if (ds.empty()) throw EmptyDataset();
  const Compiled& net = *compiled_;

  std::map<std::vector<std::string>, std::uint64_t> variants;
  for (const auto& tr : ds.traces) ++variants[tr.activities];

  // Prefix automaton over visible model behaviour.
  struct State {
    std::uint64_t visits = 0;
    std::set<int> observed;
    std::set<int> allowed;
    std::map<int, std::size_t> next;
  };
  std::vector<State> states(1);
  std::unordered_map<std::string, std::set<int>> allowed_cache;

  auto allowed_from = [&](const std::string& m) -> const std::set<int>& {
    auto it = allowed_cache.find(m);
    if (it != allowed_cache.end()) return it->second;
    std::set<int> labels;
    std::unordered_set<std::string> seen{m};
    std::deque<std::string> queue{m};
    while (!queue.empty()) {
      const std::string cur = std::move(queue.front());
      queue.pop_front();
      for (auto t : net.visible)
        if (net.enabled(cur, t)) labels.insert(net.label[t]);
      for (auto t : net.silent) {
        if (!net.enabled(cur, t)) continue;
        auto nxt = net.fire(cur, t);
        if (seen.insert(nxt).second) {
          if (seen.size() > options_.state_budget) throw StateBudgetExceeded(options_.state_budget);
          queue.push_back(std::move(nxt));
        }
      }
    }
    return allowed_cache.emplace(m, std::move(labels)).first->second;
  };
  auto record = [&](std::size_t s, const std::string& m, std::uint64_t weight) {
    states[s].visits += weight;
    const auto& allowed = allowed_from(m);
    states[s].allowed.insert(allowed.begin(), allowed.end());
  };

  ReplaySummary out;
  out.transition_firings.assign(net.label.size(), 0);
  double fitness_sum = 0;
  std::uint64_t total = 0;
  const double model_cost = model_run_cost();

  for (const auto& [acts, count] : variants) {
    const auto al = search(encode(Trace{{}, acts, std::nullopt}), acts);
    const double ref = static_cast<double>(acts.size()) + model_cost;
    fitness_sum += static_cast<double>(count) * (ref <= 0 ? 1.0 : 1.0 - al.cost / ref);
    total += count;

    std::string marking = net.initial;
    std::size_t s = 0;
    record(s, marking, count);
    for (const auto& mv : al.moves) {
      if (!mv.transition) continue;
      const auto t = static_cast<std::uint32_t>(index(*mv.transition));
      out.transition_firings[t] += count;
      marking = net.fire(marking, t);
      if (net.label[t] < 0) continue;
      const int lbl = net.label[t];
      states[s].observed.insert(lbl);
      auto [it, fresh] = states[s].next.emplace(lbl, states.size());
      if (fresh) states.emplace_back();
      s = it->second;
      record(s, marking, count);
    }
  }
  out.fitness = fitness_sum / static_cast<double>(total);

  double num = 0, den = 0;
  for (const auto& st : states) {
    if (st.allowed.empty()) continue;
    num += static_cast<double>(st.visits) * static_cast<double>(st.observed.size()) /
           static_cast<double>(st.allowed.size());
    den += static_cast<double>(st.visits);
  }
  out.precision = den > 0 ? num / den : 1.0;
  return out;
}

Alignment optimal_alignment(const PetriNet& net, const Trace& trace, const AlignmentOptions& options) {
  return ConformanceChecker(net, options).align(trace);
}

double reference_cost(const PetriNet& net, const Trace& trace) {
  return ConformanceChecker(net).reference_cost(trace);
}

double fitness(const PetriNet& net, const Dataset& ds) { return ConformanceChecker(net).fitness(ds); }

double precision(const PetriNet& net, const Dataset& ds) { return ConformanceChecker(net).precision(ds); }

QualityReport evaluate(const ProcessTree& tree, const Dataset& train, const Dataset& test,
                       const AlignmentOptions& options) {
  if (train.empty() || test.empty()) throw EmptyDataset();
  const PetriNet net = tree_to_petri_net(tree);
  const ConformanceChecker checker(net, options);
  const auto on_train = checker.replay(train);
  const auto on_test = checker.replay(test);
  QualityReport r;
  r.fitness_train = on_train.fitness;
  r.fitness_test = on_test.fitness;
  r.precision_train = on_train.precision;
  r.precision_test = on_test.precision;
  r.generalization_gap_fitness = std::abs(r.fitness_train - r.fitness_test);
  r.generalization_gap_precision = std::abs(r.precision_train - r.precision_test);
  r.simplicity = simplicity(tree, train.activity_universe());
  return r;
}

namespace {

double round4(double x) { return std::round(x * 1e4) / 1e4; }

}  // namespace

std::string quality_to_json(const QualityReport& r) {
  nlohmann::ordered_json j;
  j["fitness_train"] = round4(r.fitness_train);
  j["fitness_test"] = round4(r.fitness_test);
  j["precision_train"] = round4(r.precision_train);
  j["precision_test"] = round4(r.precision_test);
  j["generalization_gap_fitness"] = round4(r.generalization_gap_fitness);
  j["generalization_gap_precision"] = round4(r.generalization_gap_precision);
  j["simplicity"] = round4(r.simplicity);
  return j.dump(2) + "\n";
}

std::string quality_table(const QualityReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%-12s %10s %10s %10s\n"
                "%-12s %9.1f%% %9.1f%% %9.1f%%\n"
                "%-12s %9.1f%% %9.1f%% %9.1f%%\n"
                "%-12s %9.1f%%\n",
                "", "training", "testing", "gap",                                       //
                "fitness", 100 * r.fitness_train, 100 * r.fitness_test, 100 * r.generalization_gap_fitness,  //
                "precision", 100 * r.precision_train, 100 * r.precision_test,
                100 * r.generalization_gap_precision,  //
                "simplicity", 100 * r.simplicity);
  return buf;
}

}  // namespace alarmtop
