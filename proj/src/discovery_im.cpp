#include "alarmtop/discovery_im.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "alarmtop/error.hpp"

namespace alarmtop {

std::string_view to_string(CutKind kind) {
  switch (kind) {
    case CutKind::Exclusive: return "exclusive";
    case CutKind::Sequence: return "sequence";
    case CutKind::Parallel: return "parallel";
    case CutKind::Loop: return "loop";
  }
  return "?";
}

std::set<std::string> Dfg::activities() const {
  std::set<std::string> out;
  for (const auto& [a, n] : activity_counts) out.insert(a);
  return out;
}

Dfg build_dfg(const Dataset& ds) {
  if (ds.empty()) throw EmptyDataset();
  Dfg g;
  for (const auto& tr : ds.traces) {
    if (tr.empty()) continue;
    ++g.start_activities[tr.activities.front()];
    ++g.end_activities[tr.activities.back()];
    for (std::size_t k = 0; k < tr.size(); ++k) {
      ++g.activity_counts[tr.activities[k]];
      if (k + 1 < tr.size()) ++g.edges[{tr.activities[k], tr.activities[k + 1]}];
    }
  }
  return g;
}

Dfg filter_infrequent(const Dfg& g, double threshold) {
  Dfg out;
  out.activity_counts = g.activity_counts;

  std::map<std::string, std::size_t> max_out;
  for (const auto& [edge, n] : g.edges) max_out[edge.first] = std::max(max_out[edge.first], n);
  for (const auto& [edge, n] : g.edges)
    if (static_cast<double>(n) >= threshold * static_cast<double>(max_out[edge.first])) out.edges.emplace(edge, n);

  auto filter_ends = [threshold](const std::map<std::string, std::size_t>& in) {
    std::size_t top = 0;
    for (const auto& [a, n] : in) top = std::max(top, n);
    std::map<std::string, std::size_t> kept;
    for (const auto& [a, n] : in)
      if (static_cast<double>(n) >= threshold * static_cast<double>(top)) kept.emplace(a, n);
    return kept;
  };
  out.start_activities = filter_ends(g.start_activities);
  out.end_activities = filter_ends(g.end_activities);
  return out;
}

// ---------------------------------------------------------------------------
// cut detection

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }
  /// Groups ordered by their smallest member.
  std::vector<std::vector<std::size_t>> groups() {
    std::map<std::size_t, std::vector<std::size_t>> by_root;
    for (std::size_t i = 0; i < parent_.size(); ++i) by_root[find(i)].push_back(i);
    std::vector<std::vector<std::size_t>> out;
    for (auto& [r, g] : by_root) out.push_back(std::move(g));
    return out;
  }

 private:
  std::vector<std::size_t> parent_;
};

// Index-based view of a DFG for the cut searches.
struct Graph {
  std::vector<std::string> names;
  std::vector<std::vector<bool>> edge;
  std::vector<bool> start, end;

  explicit Graph(const Dfg& g) {
    for (const auto& [a, n] : g.activity_counts) names.push_back(a);
    const std::size_t n = names.size();
    edge.assign(n, std::vector<bool>(n, false));
    start.assign(n, false);
    end.assign(n, false);
    std::map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i) idx[names[i]] = i;
    for (const auto& [e, c] : g.edges) {
      const auto from = idx.find(e.first), to = idx.find(e.second);
      if (from != idx.end() && to != idx.end()) edge[from->second][to->second] = true;
    }
    for (const auto& [a, c] : g.start_activities)
      if (auto it = idx.find(a); it != idx.end()) start[it->second] = true;
    for (const auto& [a, c] : g.end_activities)
      if (auto it = idx.find(a); it != idx.end()) end[it->second] = true;
  }

  std::size_t size() const { return names.size(); }

  Cut to_cut(CutKind kind, const std::vector<std::vector<std::size_t>>& groups) const {
    Cut cut{kind, {}};
    for (const auto& grp : groups) {
      std::set<std::string> part;
      for (auto i : grp) part.insert(names[i]);
      cut.parts.push_back(std::move(part));
    }
    return cut;
  }
};

std::optional<Cut> exclusive_cut(const Graph& g) {
  UnionFind uf(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j)
      if (g.edge[i][j]) uf.unite(i, j);
  auto groups = uf.groups();
  if (groups.size() < 2) return std::nullopt;
  return g.to_cut(CutKind::Exclusive, groups);
}

std::optional<Cut> sequence_cut(const Graph& g) {
  const std::size_t n = g.size();
  auto reach = g.edge;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (reach[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (reach[k][j]) reach[i][j] = true;

  // Mutually reachable (same SCC) and mutually unreachable activities share a part.
  UnionFind uf(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (reach[i][j] == reach[j][i]) uf.unite(i, j);
  auto groups = uf.groups();
  if (groups.size() < 2) return std::nullopt;

  auto before = [&](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    for (auto x : a)
      for (auto y : b)
        if (!reach[x][y] || reach[y][x]) return false;
    return true;
  };
  // The number of groups a group precedes fixes its position in a total order.
  std::vector<std::pair<std::size_t, std::size_t>> rank;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    std::size_t precedes = 0;
    for (std::size_t j = 0; j < groups.size(); ++j)
      if (i != j && before(groups[i], groups[j])) ++precedes;
    rank.emplace_back(groups.size() - 1 - precedes, i);
  }
  std::sort(rank.begin(), rank.end());
  std::vector<std::vector<std::size_t>> ordered;
  for (std::size_t k = 0; k < rank.size(); ++k) {
    if (rank[k].first != k) return std::nullopt;
    ordered.push_back(groups[rank[k].second]);
  }
  for (std::size_t i = 0; i < ordered.size(); ++i)
    for (std::size_t j = i + 1; j < ordered.size(); ++j)
      if (!before(ordered[i], ordered[j])) return std::nullopt;
  return g.to_cut(CutKind::Sequence, ordered);
}

std::optional<Cut> parallel_cut(const Graph& g) {
  const std::size_t n = g.size();
  UnionFind uf(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (!(g.edge[i][j] && g.edge[j][i])) uf.unite(i, j);
  auto groups = uf.groups();
  if (groups.size() < 2) return std::nullopt;

  auto complete = [&](const std::vector<std::size_t>& grp) {
    bool s = false, e = false;
    for (auto i : grp) {
      s = s || g.start[i];
      e = e || g.end[i];
    }
    return s && e;
  };
  // Parts missing a start or an end activity are folded into the first
  // complete part.
  std::vector<std::vector<std::size_t>> kept, orphans;
  for (auto& grp : groups) (complete(grp) ? kept : orphans).push_back(std::move(grp));
  if (kept.size() < 2) return std::nullopt;
  for (auto& o : orphans) kept.front().insert(kept.front().end(), o.begin(), o.end());
  std::sort(kept.front().begin(), kept.front().end());
  return g.to_cut(CutKind::Parallel, kept);
}

std::optional<Cut> loop_cut(const Graph& g) {
  const std::size_t n = g.size();
  std::vector<bool> body(n, false);
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    body[i] = g.start[i] || g.end[i];
    any = any || body[i];
  }
  if (!any) return std::nullopt;

  UnionFind uf(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (!body[i] && !body[j] && (g.edge[i][j] || g.edge[j][i])) uf.unite(i, j);
  std::vector<std::vector<std::size_t>> candidates;
  for (auto& grp : uf.groups())
    if (!body[grp.front()]) candidates.push_back(std::move(grp));

  auto violates = [&](const std::vector<std::size_t>& comp) {
    std::vector<bool> in(n, false);
    for (auto c : comp) in[c] = true;
    for (auto c : comp)
      for (std::size_t b = 0; b < n; ++b) {
        if (!body[b]) continue;
        // Redo parts are entered from end activities only and left towards
        // start activities only, and completely so.
        if (g.edge[b][c] && !g.end[b]) return true;
        if (g.edge[c][b] && !g.start[b]) return true;
      }
    for (auto c : comp) {
      bool entry = false, exit = false;
      for (std::size_t b = 0; b < n; ++b) {
        entry = entry || (body[b] && g.edge[b][c]);
        exit = exit || (body[b] && g.edge[c][b]);
      }
      for (std::size_t b = 0; b < n; ++b) {
        if (entry && g.end[b] && !g.edge[b][c]) return true;
        if (exit && g.start[b] && !g.edge[c][b]) return true;
      }
    }
    return false;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = candidates.begin(); it != candidates.end(); ++it) {
      if (violates(*it)) {
        for (auto c : *it) body[c] = true;
        candidates.erase(it);
        changed = true;
        break;
      }
    }
  }
  if (candidates.empty()) return std::nullopt;

  std::vector<std::vector<std::size_t>> parts{{}};
  for (std::size_t i = 0; i < n; ++i)
    if (body[i]) parts.front().push_back(i);
  for (auto& c : candidates) parts.push_back(std::move(c));
  return g.to_cut(CutKind::Loop, parts);
}

}  // namespace

std::optional<Cut> find_cut(const Dfg& dfg) {
  const Graph g(dfg);
  if (g.size() < 2) return std::nullopt;
  if (auto c = exclusive_cut(g)) return c;
  if (auto c = sequence_cut(g)) return c;
  if (auto c = parallel_cut(g)) return c;
  return loop_cut(g);
}

// ---------------------------------------------------------------------------
// splitting

namespace {

Trace sub_trace(const Trace& tr, std::vector<std::string> acts) {
  return Trace{tr.case_id, std::move(acts), std::nullopt};
}

}  // namespace

DatasetSplit split_dataset(const Dataset& ds, const Cut& cut) {
  const std::size_t k = cut.parts.size();
  DatasetSplit out;
  out.parts.resize(k);
  for (auto& p : out.parts) p.fault_label = ds.fault_label;

  std::map<std::string, std::size_t> part_of;
  for (std::size_t p = 0; p < k; ++p)
    for (const auto& a : cut.parts[p]) part_of[a] = p;
  // Activities outside the cut never match any part.
  auto which = [&](const std::string& a) {
    auto it = part_of.find(a);
    return it == part_of.end() ? k : it->second;
  };

  for (const auto& tr : ds.traces) {
    switch (cut.kind) {
      case CutKind::Exclusive: {
        std::vector<std::size_t> votes(k, 0);
        for (const auto& a : tr.activities)
          if (auto p = which(a); p < k) ++votes[p];
        const auto best = static_cast<std::size_t>(std::max_element(votes.begin(), votes.end()) - votes.begin());
        std::vector<std::string> kept;
        for (const auto& a : tr.activities)
          if (which(a) == best) kept.push_back(a);
        out.events_dropped += tr.size() - kept.size();
        out.parts[best].traces.push_back(sub_trace(tr, std::move(kept)));
        break;
      }
      case CutKind::Sequence: {
        // cost[i][p]: fewest misplaced events among the first i when event i-1
        // is assigned to part p (assignments never move backwards).
        const std::size_t len = tr.size();
        constexpr auto inf = std::numeric_limits<std::size_t>::max() / 2;
        std::vector<std::vector<std::size_t>> cost(len + 1, std::vector<std::size_t>(k, inf));
        for (std::size_t p = 0; p < k; ++p) cost[0][p] = 0;
        for (std::size_t i = 0; i < len; ++i) {
          std::size_t best_prefix = inf;
          const auto own = which(tr.activities[i]);
          for (std::size_t p = 0; p < k; ++p) {
            best_prefix = std::min(best_prefix, cost[i][p]);
            cost[i + 1][p] = best_prefix + (own == p ? 0 : 1);
          }
        }
        std::vector<std::size_t> assign(len);
        std::size_t p = static_cast<std::size_t>(
            std::min_element(cost[len].begin(), cost[len].end()) - cost[len].begin());
        for (std::size_t i = len; i > 0; --i) {
          assign[i - 1] = p;
          // Step back to the earliest part that still attains the optimum.
          const std::size_t need = cost[i][p] - (which(tr.activities[i - 1]) == p ? 0 : 1);
          std::size_t q = 0;
          while (cost[i - 1][q] != need) ++q;
          p = q;
        }
        std::vector<std::vector<std::string>> pieces(k);
        for (std::size_t i = 0; i < len; ++i) {
          if (which(tr.activities[i]) == assign[i])
            pieces[assign[i]].push_back(tr.activities[i]);
          else
            ++out.events_dropped;
        }
        for (std::size_t q = 0; q < k; ++q) out.parts[q].traces.push_back(sub_trace(tr, std::move(pieces[q])));
        break;
      }
      case CutKind::Parallel: {
        std::vector<std::vector<std::string>> pieces(k);
        for (const auto& a : tr.activities) {
          if (auto p = which(a); p < k)
            pieces[p].push_back(a);
          else
            ++out.events_dropped;
        }
        for (std::size_t q = 0; q < k; ++q) out.parts[q].traces.push_back(sub_trace(tr, std::move(pieces[q])));
        break;
      }
      case CutKind::Loop: {
        bool expect_body = true;
        std::size_t current = k;
        std::vector<std::string> run;
        auto flush = [&]() {
          if (current == k) return;
          if (current == 0) {
            out.parts[0].traces.push_back(sub_trace(tr, std::move(run)));
            expect_body = false;
          } else {
            if (expect_body) out.parts[0].traces.push_back(sub_trace(tr, {}));
            out.parts[current].traces.push_back(sub_trace(tr, std::move(run)));
            expect_body = true;
          }
          run.clear();
        };
        for (const auto& a : tr.activities) {
          const auto p = which(a);
          if (p == k) {
            ++out.events_dropped;
            continue;
          }
          if (p != current) {
            flush();
            current = p;
          }
          run.push_back(a);
        }
        flush();
        if (expect_body) out.parts[0].traces.push_back(sub_trace(tr, {}));
        break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// recursion

namespace {

ProcessTree flower(const std::set<std::string>& acts) {
  std::vector<ProcessTree> kids{ProcessTree::tau()};
  for (const auto& a : acts) kids.push_back(ProcessTree::activity(a));
  return ProcessTree::make(NodeKind::Loop, std::move(kids));
}

ProcessTree mine(const Dataset& ds, double threshold) {
  Dataset nonempty{{}, ds.fault_label};
  for (const auto& tr : ds.traces)
    if (!tr.empty()) nonempty.traces.push_back(tr);

  if (nonempty.empty()) return ProcessTree::tau();
  if (nonempty.traces.size() < ds.traces.size())
    return ProcessTree::make(NodeKind::Xor, {mine(nonempty, threshold), ProcessTree::tau()});

  const auto acts = nonempty.activity_universe();
  if (acts.size() == 1) {
    auto leaf = ProcessTree::activity(*acts.begin());
    const bool single = std::all_of(nonempty.traces.begin(), nonempty.traces.end(),
                                    [](const Trace& t) { return t.size() == 1; });
    if (single) return leaf;
    return ProcessTree::make(NodeKind::Loop, {std::move(leaf), ProcessTree::tau()});
  }

  const Dfg g = build_dfg(nonempty);
  auto cut = find_cut(g);
  if (!cut && threshold > 0) cut = find_cut(filter_infrequent(g, threshold));
  if (!cut) return flower(acts);

  auto split = split_dataset(nonempty, *cut);
  std::vector<ProcessTree> kids;
  for (const auto& part : split.parts) kids.push_back(mine(part, threshold));
  switch (cut->kind) {
    case CutKind::Exclusive: return ProcessTree::make(NodeKind::Xor, std::move(kids));
    case CutKind::Sequence: return ProcessTree::make(NodeKind::Seq, std::move(kids));
    case CutKind::Parallel: return ProcessTree::make(NodeKind::And, std::move(kids));
    case CutKind::Loop: return ProcessTree::make(NodeKind::Loop, std::move(kids));
  }
  return flower(acts);
}

}  // namespace

ProcessTree discover_im(const Dataset& ds, double threshold) {
  if (ds.empty()) throw EmptyDataset();
  return canonicalize(mine(ds, threshold));
}

}  // namespace alarmtop
